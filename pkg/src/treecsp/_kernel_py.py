"""Pure-Python propagation and search kernels.

Domains are int bitmasks over template vertices.  The instance graph is given
in CSR form: for vertex ``y`` the slice ``indptr[y]:indptr[y+1]`` of ``nbr``
lists its neighbours and ``isout`` says whether the edge is ``y -> nbr``.
The compiled ``_kernel`` module exposes the same two functions.
"""

SAT = 1
UNSAT = 0
TIMEOUT = -1


def _image(mask, table):
    acc = 0
    while mask:
        low = mask & -mask
        acc |= table[low.bit_length() - 1]
        mask ^= low
    return acc


def _propagate(queue, inq, dom, indptr, nbr, isout, hsucc, hpred, trail, budget, steps):
    """AC-3 with a vertex worklist.  Returns (ok, steps)."""
    head = 0
    while head < len(queue):
        y = queue[head]
        head += 1
        inq[y] = False
        d = dom[y]
        succ = _image(d, hsucc)
        pred = _image(d, hpred)
        for i in range(indptr[y], indptr[y + 1]):
            x = nbr[i]
            old = dom[x]
            new = old & (succ if isout[i] else pred)
            if new != old:
                steps += bin(old ^ new).count("1")
                if trail is not None:
                    trail.append((x, old))
                dom[x] = new
                if not new:
                    for v in queue[head:]:
                        inq[v] = False
                    return False, steps
                if budget >= 0 and steps > budget:
                    for v in queue[head:]:
                        inq[v] = False
                    raise _Timeout(steps)
                if not inq[x]:
                    inq[x] = True
                    queue.append(x)
                if x == y:
                    d = new
                    succ = _image(d, hsucc)
                    pred = _image(d, hpred)
    queue.clear()
    return True, steps


class _Timeout(Exception):
    def __init__(self, steps):
        self.steps = steps


def solve(n, indptr, nbr, isout, hsucc, hpred, dom, budget=-1, search=True):
    """Establish arc consistency on ``dom`` (in place) and optionally search.

    Returns ``(status, steps)``; on SAT with ``search`` every domain is a
    singleton.  ``budget < 0`` means unbounded.
    """
    for x in range(n):
        if not dom[x]:
            return UNSAT, 0
    queue = list(range(n))
    inq = [True] * n
    try:
        ok, steps = _propagate(queue, inq, dom, indptr, nbr, isout, hsucc, hpred,
                               [] if search else None, budget, 0)
        if not ok:
            return UNSAT, steps
        if not search:
            return SAT, steps
        trail = []
        frames = []  # (var, value bit, trail mark)
        while True:
            var = -1
            best = 1 << 62
            for x in range(n):
                c = bin(dom[x]).count("1")
                if 1 < c < best:
                    best = c
                    var = x
                    if c == 2:
                        break
            if var < 0:
                return SAT, steps
            val = dom[var] & -dom[var]
            frames.append((var, val, len(trail)))
            trail.append((var, dom[var]))
            dom[var] = val
            queue.append(var)
            inq[var] = True
            ok, steps = _propagate(queue, inq, dom, indptr, nbr, isout, hsucc, hpred,
                                   trail, budget, steps)
            while not ok:
                if not frames:
                    return UNSAT, steps
                var, val, mark = frames.pop()
                while len(trail) > mark:
                    x, old = trail.pop()
                    dom[x] = old
                trail.append((var, dom[var]))
                dom[var] &= ~val
                steps += 1
                if not dom[var]:
                    ok = False
                    continue
                queue.append(var)
                inq[var] = True
                ok, steps = _propagate(queue, inq, dom, indptr, nbr, isout, hsucc, hpred,
                                       trail, budget, steps)
    except _Timeout as t:
        return TIMEOUT, t.steps


def tree_self_ac(parent, out, fixed=-1):
    """Arc consistency of an oriented tree against itself with full lists.

    ``parent[i] < i`` for ``i >= 1`` (``parent[0] == -1``) and ``out[i]`` is
    true when the edge is ``parent[i] -> i``.  ``fixed >= 0`` pins that vertex
    to itself.  Returns True iff every list ends as its own singleton.
    """
    n = len(parent)
    succ = [0] * n
    pred = [0] * n
    adj = [[] for _ in range(n)]
    for i in range(1, n):
        p = parent[i]
        if out[i]:
            succ[p] |= 1 << i
            pred[i] |= 1 << p
            adj[p].append((i, True))
            adj[i].append((p, False))
        else:
            succ[i] |= 1 << p
            pred[p] |= 1 << i
            adj[i].append((p, True))
            adj[p].append((i, False))
    full = (1 << n) - 1
    dom = [full] * n
    if fixed >= 0:
        dom[fixed] = 1 << fixed
    queue = list(range(n))
    inq = [True] * n
    head = 0
    while head < len(queue):
        y = queue[head]
        head += 1
        inq[y] = False
        d = dom[y]
        s = _image(d, succ)
        p = _image(d, pred)
        for x, isout in adj[y]:
            old = dom[x]
            new = old & (s if isout else p)
            if new != old:
                dom[x] = new
                if not inq[x]:
                    inq[x] = True
                    queue.append(x)
    return all(dom[i] == 1 << i for i in range(n))
