"""Classification campaigns: condition cascades over core trees, CSV output.

A cascade is a list of stages.  A stage is either one condition or a chain
family with an increasing schedule of lengths; a chain stops at its first
satisfied length and the remaining lengths are recorded as ``skipped``.
Stages may also be skipped when another stage was satisfied (for example a
binary symmetric polymorphism is implied by total symmetry).
"""

from __future__ import annotations

import csv
import json
import logging
import os
import re
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from . import conditions as cond
from .cores import is_core_tree
from .digraph import TreeDigraph, canonical_encoding, is_triad, parse_canonical, reverse
from .generation import core_tree_canons, triad_canons
from .indicator import AUTO, LEVELWISE, ResourceLimit, decide

log = logging.getLogger(__name__)

VERDICTS = ("sat", "unsat", "lw-sat", "lw-unsat", "timeout", "skipped")
NEGATIVE = ("unsat", "lw-unsat")
HM_SCHEDULE = (1, 2, 4, 8, 16, 30)


def doubling(start: int, bound: int) -> tuple[int, ...]:
    """start, 2*start, 4*start, ... below ``bound``, then ``bound`` itself."""
    out = []
    x = start
    while x < bound:
        out.append(x)
        x *= 2
    if bound >= start:
        out.append(bound)
    return tuple(out)


@dataclass(frozen=True)
class Stage:
    """One cascade stage; ``schedule`` is None for a single condition."""

    family: str
    schedule: tuple[int, ...] | None = None
    mode: str = AUTO
    budget: int | None = None
    skip_if_sat: tuple[str, ...] = ()
    condition_file: str | None = None

    def columns(self) -> list[str]:
        if self.schedule is None:
            return [self.name]
        return [f"{self.family}-{k}" for k in self.schedule]

    @property
    def name(self) -> str:
        if self.condition_file is not None:
            return self.condition(None).name
        return self.family

    def condition(self, k: int | None) -> cond.LinearCondition:
        if self.condition_file is not None:
            return cond.load_condition_file(self.condition_file)
        return cond.builtin(self.family, k)


@dataclass(frozen=True)
class Cascade:
    stages: tuple[Stage, ...]

    def __post_init__(self):
        seen = set()
        for st in self.stages:
            if st.schedule is not None:
                if not st.schedule or any(a >= b for a, b in zip(st.schedule, st.schedule[1:])):
                    raise ValueError(f"schedule of {st.family} is not strictly increasing")
            for k in st.schedule or (None,):
                c = st.condition(k)
                errors = [i for i in cond.validate(c) if i.level == "error"]
                if errors:
                    raise ValueError(f"stage {c.name}: {'; '.join(map(str, errors))}")
            for col in st.columns():
                if col in seen:
                    raise ValueError(f"column {col} appears twice")
                seen.add(col)

    def columns(self) -> list[str]:
        return [c for st in self.stages for c in st.columns()]

    def to_json(self) -> str:
        return json.dumps({"stages": [
            {k: v for k, v in (("condition", st.family), ("schedule", list(st.schedule) if st.schedule else None),
                               ("mode", st.mode), ("budget", st.budget),
                               ("skip_if_sat", list(st.skip_if_sat)),
                               ("condition_file", st.condition_file)) if v not in (None, [])}
            for st in self.stages]}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Cascade":
        data = json.loads(text)
        stages = []
        for s in data["stages"]:
            sched = s.get("schedule")
            stages.append(Stage(s.get("condition", "custom"), tuple(sched) if sched else None,
                                s.get("mode", AUTO), s.get("budget"),
                                tuple(s.get("skip_if_sat", ())), s.get("condition_file")))
        return cls(tuple(stages))


def default_cascade(bound: int = 32, budget: int | None = None) -> Cascade:
    return Cascade((
        Stage("ts-all", mode=LEVELWISE, budget=budget),
        Stage("wnu", (2,), AUTO, budget, ("ts-all",)),
        Stage("majority", mode=AUTO, budget=budget),
        Stage("kmm", mode=LEVELWISE, budget=budget, skip_if_sat=("ts-all", "wnu-2")),
        Stage("hm", tuple(k for k in HM_SCHEDULE if k <= bound), AUTO, budget),
        Stage("jonsson", doubling(1, bound), LEVELWISE, budget, ("majority",)),
        Stage("kk", doubling(2, bound), AUTO, budget),
        Stage("hmck", doubling(1, bound), AUTO, budget),
        Stage("nn", doubling(1, bound), AUTO, budget),
    ))


def single_stage_cascade(name: str, mode: str = AUTO, budget: int | None = None) -> Cascade:
    """A cascade running one named condition, e.g. ``kmm`` or ``hm-8``."""
    cond.builtin(name)  # reject unknown names early
    m = re.fullmatch(r"([a-z]+)-(\d+)", name)
    if m:
        return Cascade((Stage(m.group(1), (int(m.group(2)),), mode, budget),))
    return Cascade((Stage(name, None, mode, budget),))


@dataclass
class ClassificationRecord:
    canonical: str
    n: int
    is_triad: bool
    results: dict[str, str] = field(default_factory=dict)

    def row(self, columns: list[str]) -> list[str]:
        return [self.canonical, str(self.n), "1" if self.is_triad else "0"] + [
            self.results.get(c, "skipped") for c in columns]


def _run_stage(t: TreeDigraph, c: cond.LinearCondition, st: Stage, idempotent: bool) -> str:
    mode = st.mode
    if mode == LEVELWISE and c.levelwise_safe:
        mode = AUTO  # level-wise is conclusive here; auto returns sat/unsat
    try:
        return decide(t, c, mode, idempotent, st.budget).verdict
    except ResourceLimit as exc:
        log.warning("%s on %s: %s", c.name, canonical_encoding(t), exc)
        return "timeout"


def classify_tree(t, cascade: Cascade | None = None, idempotent: bool | None = None) -> ClassificationRecord:
    """Run the cascade on one tree (a TreeDigraph or canonical string)."""
    if isinstance(t, str):
        t = parse_canonical(t)
    cascade = cascade or default_cascade()
    if idempotent is None:
        idempotent = is_core_tree(t)
        if not idempotent:
            log.warning("tree is not a core; running without idempotence")
    rec = ClassificationRecord(canonical_encoding(t), t.n, is_triad(t))
    for st in cascade.stages:
        cols = st.columns()
        if any(rec.results.get(s) == "sat" for s in st.skip_if_sat):
            for col in cols:
                rec.results[col] = "skipped"
            continue
        done = False
        for k, col in zip(st.schedule or (None,), cols):
            if done:
                rec.results[col] = "skipped"
                continue
            v = _run_stage(t, st.condition(k), st, idempotent)
            rec.results[col] = v
            if v in ("sat", "lw-sat"):
                done = True
    return rec


# record validation ---------------------------------------------------------------

def _family_columns(columns: Iterable[str]) -> dict[str, list[tuple[int, str]]]:
    out: dict[str, list[tuple[int, str]]] = {}
    for c in columns:
        fam, _, k = c.rpartition("-")
        if fam in ("hm", "jonsson", "kk", "hmck", "nn") and k.isdigit():
            out.setdefault(fam, []).append((int(k), c))
    for v in out.values():
        v.sort()
    return out


def record_violations(rec: ClassificationRecord) -> list[str]:
    """Contradictions between the verdicts of one record."""
    r = rec.results
    issues = []
    for fam, cols in _family_columns(r).items():
        for i, (a, ca) in enumerate(cols):
            for b, cb in cols[i + 1:]:
                if r[ca] in ("sat", "lw-sat") and r[cb] in NEGATIVE and not (
                        r[ca] == "lw-sat" and r[cb] == "unsat"):
                    issues.append(f"{ca} is {r[ca]} but {cb} is {r[cb]}")
    fams = _family_columns(r)
    implications = [("ts-all", "wnu-2"), ("ts-all", "kmm"), ("wnu-2", "kmm"), ("ts-all", "wnu34")]
    implications += [("majority", c) for _, c in fams.get("jonsson", [])]
    for n, cj in fams.get("jonsson", []):
        implications += [(cj, ck) for m, ck in fams.get("kk", []) if m >= 2 * n + 4]
    for a, b in implications:
        if r.get(a) == "sat" and r.get(b) in NEGATIVE:
            issues.append(f"{a} is sat but {b} is {r[b]}")
    return issues


def pair_violations(rec: ClassificationRecord, other: ClassificationRecord) -> list[str]:
    """A tree and its reverse must agree on every decided verdict."""
    issues = []
    for col, v in rec.results.items():
        w = other.results.get(col)
        if w is None or "timeout" in (v, w) or "skipped" in (v, w):
            continue
        if v != w:
            issues.append(f"{col}: {v} but the reverse tree has {w}")
    return issues


# campaigns -------------------------------------------------------------------------

def parse_sizes(spec: str) -> range:
    a, sep, b = spec.partition("..")
    lo = int(a)
    hi = int(b) if sep else lo
    if lo < 1 or hi < lo:
        raise ValueError(f"bad size range {spec!r}")
    return range(lo, hi + 1)


def tree_source(sizes: Iterable[int], triads: bool = False) -> Iterator[tuple[int, str]]:
    for n in sizes:
        if triads:
            if n >= 4:
                for c in triad_canons(n):
                    yield n, c
        else:
            for c in core_tree_canons(n):
                yield n, c


def file_source(path: str) -> Iterator[tuple[int, str]]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            s = line.strip()
            if s and not s.startswith("#"):
                t = parse_canonical(s)
                yield t.n, canonical_encoding(t)


def _classify_task(args) -> ClassificationRecord:
    canon, cascade_json = args
    return classify_tree(parse_canonical(canon), Cascade.from_json(cascade_json), idempotent=True)


@dataclass
class CampaignSummary:
    records: int = 0
    skipped_existing: int = 0
    violations: list[str] = field(default_factory=list)
    timeouts: int = 0
    tallies: Counter = field(default_factory=Counter)

    def exit_code(self, timeout_fraction: float = 0.5) -> int:
        if self.violations:
            return 2
        if self.records and self.timeouts / self.records > timeout_fraction:
            return 3
        return 0

    def lines(self, columns: list[str]) -> list[str]:
        out = [f"records: {self.records} (resumed past {self.skipped_existing})"]
        for (n, verdicts), count in sorted(self.tallies.items()):
            combo = " ".join(f"{c}={v}" for c, v in zip(columns, verdicts) if v != "skipped")
            out.append(f"n={n} x{count}: {combo}")
        for v in self.violations:
            out.append(f"violation: {v}")
        return out


def _read_existing(path: str, columns: list[str]) -> dict[str, list[str]]:
    rows: dict[str, list[str]] = {}
    if not os.path.exists(path) or os.path.getsize(path) == 0:
        return rows
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["canonical", "n", "is_triad"] + columns:
            raise ValueError(f"{path} was written with a different cascade")
        for row in reader:
            if len(row) == len(header):
                rows[row[0]] = row
    return rows


def run_campaign(source: Iterable[tuple[int, str]], cascade: Cascade, out: str,
                 jobs: int = 1, resume: bool = False) -> CampaignSummary:
    """Classify every tree from ``source`` and write a CSV sorted by (n, canonical)."""
    columns = cascade.columns()
    header = ["canonical", "n", "is_triad"] + columns
    existing = _read_existing(out, columns) if resume else {}
    summary = CampaignSummary(skipped_existing=len(existing))
    todo = [(n, c) for n, c in source if c not in existing]
    by_canon: dict[str, ClassificationRecord] = {}
    for row in existing.values():
        by_canon[row[0]] = ClassificationRecord(row[0], int(row[1]), row[2] == "1",
                                                dict(zip(columns, row[3:])))
    mode = "a" if existing else "w"
    cascade_json = cascade.to_json()
    with open(out, mode, newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if mode == "w":
            writer.writerow(header)
        tasks = [(c, cascade_json) for _, c in todo]
        if jobs <= 1:
            results = map(_classify_task, tasks)
            pool = None
        else:
            pool = ProcessPoolExecutor(max_workers=jobs)
            results = pool.map(_classify_task, tasks, chunksize=max(1, len(tasks) // (jobs * 16) or 1))
        try:
            for rec in results:
                issues = record_violations(rec)
                rev = canonical_encoding(reverse(parse_canonical(rec.canonical)))
                if rev != rec.canonical and rev in by_canon:
                    issues += pair_violations(rec, by_canon[rev])
                if issues:
                    summary.violations += [f"{rec.canonical}: {i}" for i in issues]
                    continue
                by_canon[rec.canonical] = rec
                writer.writerow(rec.row(columns))
                fh.flush()
        finally:
            if pool is not None:
                pool.shutdown()
    # final deterministic rewrite
    recs = sorted(by_canon.values(), key=lambda r: (r.n, r.canonical))
    tmp = out + ".tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for rec in recs:
            writer.writerow(rec.row(columns))
    os.replace(tmp, out)
    summary.records = len(recs)
    for rec in recs:
        verdicts = tuple(rec.results.get(c, "skipped") for c in columns)
        summary.tallies[(rec.n, verdicts)] += 1
        if "timeout" in verdicts:
            summary.timeouts += 1
    return summary


def read_campaign(path: str) -> tuple[list[str], list[ClassificationRecord]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        columns = header[3:]
        recs = [ClassificationRecord(r[0], int(r[1]), r[2] == "1", dict(zip(columns, r[3:])))
                for r in reader]
    return columns, recs
