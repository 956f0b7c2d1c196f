# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled propagation and search kernels (templates with at most 64 vertices).

Mirrors ``_kernel_py`` function by function; domains are uint64 bitmasks.
"""

from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, realloc, free

cdef extern from *:
    """
    static inline int tc_popcount(unsigned long long x) { return __builtin_popcountll(x); }
    static inline int tc_ctz(unsigned long long x) { return __builtin_ctzll(x); }
    """
    int tc_popcount(unsigned long long x) nogil
    int tc_ctz(unsigned long long x) nogil

cdef enum:
    SAT = 1
    UNSAT = 0
    TIMEOUT = -1


cdef inline uint64_t image(uint64_t mask, const uint64_t* table) noexcept nogil:
    cdef uint64_t acc = 0
    while mask:
        acc |= table[tc_ctz(mask)]
        mask &= mask - 1
    return acc


cdef struct Trail:
    int* var
    uint64_t* old
    Py_ssize_t size
    Py_ssize_t cap


cdef int trail_push(Trail* t, int var, uint64_t old) noexcept nogil:
    cdef Py_ssize_t newcap
    if t.size == t.cap:
        newcap = t.cap * 2 if t.cap else 1024
        t.var = <int*> realloc(t.var, newcap * sizeof(int))
        t.old = <uint64_t*> realloc(t.old, newcap * sizeof(uint64_t))
        if t.var == NULL or t.old == NULL:
            return -1
        t.cap = newcap
    t.var[t.size] = var
    t.old[t.size] = old
    t.size += 1
    return 0


cdef struct Queue:
    int* buf
    char* inq
    Py_ssize_t head
    Py_ssize_t count
    Py_ssize_t cap


cdef inline void q_push(Queue* q, int x) noexcept nogil:
    if not q.inq[x]:
        q.inq[x] = 1
        q.buf[(q.head + q.count) % q.cap] = x
        q.count += 1


cdef inline int q_pop(Queue* q) noexcept nogil:
    cdef int x = q.buf[q.head]
    q.head = (q.head + 1) % q.cap
    q.count -= 1
    q.inq[x] = 0
    return x


cdef inline void q_clear(Queue* q) noexcept nogil:
    while q.count:
        q_pop(q)


# returns 1 ok, 0 wipe-out, -1 timeout, -2 out of memory
cdef int propagate(Queue* q, uint64_t* dom, const int* indptr, const int* nbr,
                   const unsigned char* isout, const uint64_t* hsucc, const uint64_t* hpred,
                   Trail* trail, int64_t budget, int64_t* steps) noexcept nogil:
    cdef int y, x
    cdef Py_ssize_t i
    cdef uint64_t d, succ, pred, old, new
    while q.count:
        y = q_pop(q)
        d = dom[y]
        succ = image(d, hsucc)
        pred = image(d, hpred)
        for i in range(indptr[y], indptr[y + 1]):
            x = nbr[i]
            old = dom[x]
            new = old & (succ if isout[i] else pred)
            if new != old:
                steps[0] += tc_popcount(old ^ new)
                if trail != NULL:
                    if trail_push(trail, x, old) < 0:
                        q_clear(q)
                        return -2
                dom[x] = new
                if not new:
                    q_clear(q)
                    return 0
                if budget >= 0 and steps[0] > budget:
                    q_clear(q)
                    return -1
                q_push(q, x)
                if x == y:
                    d = new
                    succ = image(d, hsucc)
                    pred = image(d, hpred)
    return 1


def solve(int n, int[::1] indptr, int[::1] nbr, unsigned char[::1] isout,
          uint64_t[::1] hsucc, uint64_t[::1] hpred, uint64_t[::1] dom,
          long long budget=-1, bint search=True):
    """Same contract as ``_kernel_py.solve``; ``dom`` is modified in place.

    ``nbr`` and ``isout`` must have at least one slot even without edges.
    """
    cdef int64_t steps = 0
    cdef int x, var, c, best, rc
    cdef uint64_t val
    cdef Queue q
    cdef Trail trail
    cdef Py_ssize_t mark
    cdef int* fvar
    cdef uint64_t* fval
    cdef Py_ssize_t* fmark
    cdef Py_ssize_t nframes = 0
    cdef int status = UNSAT
    cdef uint64_t* d
    if n == 0:
        return SAT, 0
    d = &dom[0]
    for x in range(n):
        if d[x] == 0:
            return UNSAT, 0
    q.buf = <int*> malloc(n * sizeof(int))
    q.inq = <char*> malloc(n * sizeof(char))
    q.head = 0
    q.count = 0
    q.cap = n
    trail.var = NULL
    trail.old = NULL
    trail.size = 0
    trail.cap = 0
    fvar = <int*> malloc(n * sizeof(int))
    fval = <uint64_t*> malloc(n * sizeof(uint64_t))
    fmark = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    if q.buf == NULL or q.inq == NULL or fvar == NULL or fval == NULL or fmark == NULL:
        free(q.buf); free(q.inq); free(fvar); free(fval); free(fmark)
        raise MemoryError()
    try:
        with nogil:
            for x in range(n):
                q.inq[x] = 0
            for x in range(n):
                q_push(&q, x)
            rc = propagate(&q, d, &indptr[0], &nbr[0], &isout[0],
                           &hsucc[0], &hpred[0], NULL, budget, &steps)
            if rc == 1 and not search:
                status = SAT
            elif rc == 0:
                status = UNSAT
            elif rc == -1:
                status = TIMEOUT
            elif rc == 1:
                while True:
                    var = -1
                    best = 100
                    for x in range(n):
                        c = tc_popcount(d[x])
                        if c > 1 and c < best:
                            best = c
                            var = x
                            if c == 2:
                                break
                    if var < 0:
                        status = SAT
                        break
                    val = d[var] & (~d[var] + 1)
                    fvar[nframes] = var
                    fval[nframes] = val
                    fmark[nframes] = trail.size
                    nframes += 1
                    if trail_push(&trail, var, d[var]) < 0:
                        rc = -2
                        break
                    d[var] = val
                    q_push(&q, var)
                    rc = propagate(&q, d, &indptr[0], &nbr[0], &isout[0],
                                   &hsucc[0], &hpred[0], &trail, budget, &steps)
                    while rc == 0:
                        if nframes == 0:
                            break
                        nframes -= 1
                        var = fvar[nframes]
                        val = fval[nframes]
                        mark = fmark[nframes]
                        while trail.size > mark:
                            trail.size -= 1
                            d[trail.var[trail.size]] = trail.old[trail.size]
                        if trail_push(&trail, var, d[var]) < 0:
                            rc = -2
                            break
                        d[var] &= ~val
                        steps += 1
                        if d[var] == 0:
                            continue
                        q_push(&q, var)
                        rc = propagate(&q, d, &indptr[0], &nbr[0], &isout[0],
                                       &hsucc[0], &hpred[0], &trail, budget, &steps)
                    if rc == 0:
                        status = UNSAT
                        break
                    if rc == -1:
                        status = TIMEOUT
                        break
                    if rc == -2:
                        break
        if rc == -2:
            raise MemoryError("search trail allocation failed")
    finally:
        free(q.buf); free(q.inq); free(fvar); free(fval); free(fmark)
        free(trail.var); free(trail.old)
    return status, steps


def tree_self_ac(parent, out, int fixed=-1):
    """Same contract as ``_kernel_py.tree_self_ac`` for trees of at most 64 vertices."""
    cdef int n = len(parent)
    cdef uint64_t succ[64]
    cdef uint64_t pred[64]
    cdef uint64_t dom[64]
    cdef int adj[64][64]
    cdef char adjout[64][64]
    cdef int deg[64]
    cdef int queue[64]
    cdef char inq[64]
    cdef int head = 0, count = 0
    cdef int i, p, y, x, k
    cdef uint64_t d, s, pr, old, new, full
    if n > 64:
        raise ValueError("compiled tree kernel supports at most 64 vertices")
    for i in range(n):
        succ[i] = 0
        pred[i] = 0
        deg[i] = 0
    for i in range(1, n):
        p = parent[i]
        if out[i]:
            succ[p] |= (<uint64_t>1) << i
            pred[i] |= (<uint64_t>1) << p
            adj[p][deg[p]] = i; adjout[p][deg[p]] = 1; deg[p] += 1
            adj[i][deg[i]] = p; adjout[i][deg[i]] = 0; deg[i] += 1
        else:
            succ[i] |= (<uint64_t>1) << p
            pred[p] |= (<uint64_t>1) << i
            adj[i][deg[i]] = p; adjout[i][deg[i]] = 1; deg[i] += 1
            adj[p][deg[p]] = i; adjout[p][deg[p]] = 0; deg[p] += 1
    full = (~(<uint64_t>0)) if n == 64 else (((<uint64_t>1) << n) - 1)
    for i in range(n):
        dom[i] = full
        queue[i] = i
        inq[i] = 1
    if fixed >= 0:
        dom[fixed] = (<uint64_t>1) << fixed
    count = n
    while count:
        y = queue[head]
        head = (head + 1) % 64
        count -= 1
        inq[y] = 0
        d = dom[y]
        s = image(d, succ)
        pr = image(d, pred)
        for k in range(deg[y]):
            x = adj[y][k]
            old = dom[x]
            new = old & (s if adjout[y][k] else pr)
            if new != old:
                dom[x] = new
                if not inq[x]:
                    inq[x] = 1
                    queue[(head + count) % 64] = x
                    count += 1
    for i in range(n):
        if dom[i] != (<uint64_t>1) << i:
            return False
    return True


cdef inline int64_t uf_find(int64_t* p, int64_t x) noexcept nogil:
    while p[x] != x:
        p[x] = p[p[x]]
        x = p[x]
    return x


def components(int64_t n, const int64_t[::1] a, const int64_t[::1] b, int64_t[::1] labels):
    """Connected components of the undirected graph ``a[i] -- b[i]``.

    Fills ``labels`` with component numbers ordered by smallest member and
    returns the number of components.
    """
    cdef int64_t i, ra, rb, count = 0
    cdef int64_t* p = <int64_t*> malloc(max(n, 1) * sizeof(int64_t))
    if p == NULL:
        raise MemoryError()
    with nogil:
        for i in range(n):
            p[i] = i
        for i in range(a.shape[0]):
            ra = uf_find(p, a[i])
            rb = uf_find(p, b[i])
            # the smaller id stays the root
            if ra < rb:
                p[rb] = ra
            elif rb < ra:
                p[ra] = rb
        for i in range(n):
            ra = uf_find(p, i)
            if ra == i:
                labels[i] = count
                count += 1
            else:
                labels[i] = labels[ra]
    free(p)
    return count
