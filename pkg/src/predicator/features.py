"""Static per-candidate code features.

All quantities are exact :class:`~fractions.Fraction` values.  The dependence
regions they are computed over are small DAGs built from operand def-use
edges only.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from graphlib import CycleError, TopologicalSorter
from typing import Mapping, Sequence

from .ifconv import Candidate, check_legality
from .ir import CfgInfo, Function, Instruction

FEATURE_NAMES = (
    "bb_size", "true_cp", "false_cp", "min_cp", "unexploited_ilp", "branch_depth",
    "loop_depth", "slack_sum", "max_depth", "true_bb_depth", "false_bb_depth",
)


@dataclass(frozen=True)
class Region:
    """Dependence DAG: node ``i`` has ``latencies[i]`` and waits on ``deps[i]``."""

    latencies: tuple[int, ...]
    deps: tuple[tuple[int, ...], ...]
    names: tuple[str | None, ...] = ()

    @classmethod
    def from_instructions(cls, instrs: Sequence[Instruction], latency: Mapping[str, int]) -> Region:
        where: dict[str, int] = {}
        lats, deps, names = [], [], []
        for i, ins in enumerate(instrs):
            lats.append(latency[ins.opcode])
            deps.append(tuple(sorted({where[u] for u in ins.uses() if u in where})))
            names.append(ins.result)
            if ins.result is not None:
                where[ins.result] = i
        return cls(tuple(lats), tuple(deps), tuple(names))

    def __len__(self) -> int:
        return len(self.latencies)

    def index_of(self, name: str) -> int | None:
        for i, n in enumerate(self.names):
            if n == name:
                return i
        return None

    def order(self) -> list[int]:
        ts = TopologicalSorter({i: self.deps[i] for i in range(len(self))})
        try:
            return list(ts.static_order())
        except CycleError as e:
            raise ValueError(f"dependence cycle in region: {e.args[1]}") from None

    def total_latency(self) -> int:
        return sum(self.latencies)


def asap(r: Region) -> list[int]:
    """Earliest start cycle of every node."""
    start = [0] * len(r)
    for i in r.order():
        start[i] = max((start[d] + r.latencies[d] for d in r.deps[i]), default=0)
    return start


def region_critical_path(r: Region) -> int:
    s = asap(r)
    return max((s[i] + r.latencies[i] for i in range(len(r))), default=0)


def alap(r: Region, cp: int | None = None) -> list[int]:
    """Latest start cycle of every node that keeps the region within ``cp``."""
    if cp is None:
        cp = region_critical_path(r)
    succs: list[list[int]] = [[] for _ in range(len(r))]
    for i, ds in enumerate(r.deps):
        for d in ds:
            succs[d].append(i)
    late = [0] * len(r)
    for i in reversed(r.order()):
        late[i] = min((late[s] for s in succs[i]), default=cp) - r.latencies[i]
    return late


def slack(r: Region) -> list[int]:
    early, late = asap(r), alap(r)
    return [b - a for a, b in zip(early, late)]


def slack_sum(r: Region) -> int:
    return sum(slack(r))


@dataclass(frozen=True)
class FeatureVector:
    bb_size: Fraction
    true_cp: Fraction
    false_cp: Fraction
    min_cp: Fraction
    unexploited_ilp: Fraction
    branch_depth: Fraction
    loop_depth: Fraction
    slack_sum: Fraction
    max_depth: Fraction
    true_bb_depth: Fraction
    false_bb_depth: Fraction
    # not network inputs; kept for the baseline heuristic
    merged_cp: Fraction = Fraction(0)
    merged_latency: Fraction = Fraction(0)
    true_latency: Fraction | None = None
    false_latency: Fraction | None = None

    def as_tuple(self) -> tuple[Fraction, ...]:
        return tuple(getattr(self, n) for n in FEATURE_NAMES)


NormalizedVector = tuple[Fraction, ...]


def extract_features(f: Function, c: Candidate, mm, cfg: CfgInfo,
                     memories: Mapping[str, int] | None = None) -> FeatureVector:
    """Compute the eleven features of candidate ``c``.

    The merged region is head body, true side, false side, then one select
    per join phi, exactly as conversion would lay it out.
    """
    leg = check_legality(f, c.head, cfg, memories)
    if not leg.legal or leg.candidate.join != c.join or leg.candidate.shape != c.shape:
        raise ValueError(f"@{f.name}:{c.head} is not a legal candidate ({', '.join(leg.reasons)})")
    lat = mm.latency
    head = f.block(c.head)
    cond = head.terminator.cond
    t_body = f.block(c.true_side).body if c.true_side else ()
    f_body = f.block(c.false_side).body if c.false_side else ()
    join = f.block(c.join)

    selects = [Instruction(p.result, "select",
                           (cond, p.value_from(c.true_pred), p.value_from(c.false_pred)))
               for p in join.phis]
    t_region = Region.from_instructions(t_body, lat)
    f_region = Region.from_instructions(f_body, lat)
    h_region = Region.from_instructions(head.body, lat)
    merged = Region.from_instructions([*head.body, *t_body, *f_body, *selects], lat)

    true_cp = Fraction(region_critical_path(t_region))
    false_cp = Fraction(region_critical_path(f_region))
    cp = region_critical_path(merged)
    total = merged.total_latency()
    if cp:
        ilp = Fraction(total, cp)
    else:
        ilp = Fraction(1 if len(merged) else 0)

    branch_depth = 0
    if isinstance(cond, str):
        k = h_region.index_of(cond)
        if k is not None:
            branch_depth = asap(h_region)[k]

    m_early, m_late = asap(merged), alap(merged, cp)
    first_sel = len(merged) - len(selects)
    max_depth = max((m_late[i] for i in range(first_sel, len(merged))), default=0)

    def side_depth(region, side_values):
        early = asap(region)
        depths = []
        for v in side_values:
            k = region.index_of(v) if isinstance(v, str) else None
            depths.append((early[k] if k is not None else 0) + lat["select"])
        return max(depths, default=0)

    true_bb_depth = side_depth(t_region, [p.value_from(c.true_pred) for p in join.phis])
    false_bb_depth = side_depth(f_region, [p.value_from(c.false_pred) for p in join.phis])

    return FeatureVector(
        bb_size=Fraction(len(head)),
        true_cp=true_cp,
        false_cp=false_cp,
        min_cp=min(true_cp, false_cp),
        unexploited_ilp=ilp,
        branch_depth=Fraction(branch_depth),
        loop_depth=Fraction(cfg.loop_depth[c.head]),
        slack_sum=Fraction(sum(b - a for a, b in zip(m_early, m_late))),
        max_depth=Fraction(max_depth),
        true_bb_depth=Fraction(true_bb_depth),
        false_bb_depth=Fraction(false_bb_depth),
        merged_cp=Fraction(cp),
        merged_latency=Fraction(total),
        true_latency=Fraction(t_region.total_latency()) if c.true_side else None,
        false_latency=Fraction(f_region.total_latency()) if c.false_side else None,
    )


def normalize_features(vs: Sequence[FeatureVector]) -> list[NormalizedVector]:
    """Per-feature min-max scaling to [0, 1]; constant features map to 0."""
    if not vs:
        raise ValueError("cannot normalize an empty feature set")
    rows = [v.as_tuple() if isinstance(v, FeatureVector) else tuple(v) for v in vs]
    lo = [min(col) for col in zip(*rows)]
    hi = [max(col) for col in zip(*rows)]
    return [tuple(Fraction(0) if h == m else (x - m) / (h - m)
                  for x, m, h in zip(row, lo, hi)) for row in rows]


def fmt6(x) -> str:
    """Exact decimal rendering with six fractional digits (half-even)."""
    q = round(Fraction(x) * 10**6)
    sign = "-" if q < 0 else ""
    q = abs(q)
    return f"{sign}{q // 10**6}.{q % 10**6:06d}"


def features_csv(vs: Sequence[FeatureVector], delimiter: str = ",") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(FEATURE_NAMES)
    for v in vs:
        w.writerow([fmt6(x) for x in v.as_tuple()])
    return buf.getvalue()


def parse_features_csv(text: str) -> list[tuple[Fraction, ...]]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != FEATURE_NAMES:
        raise ValueError("features CSV header does not match the expected feature names")
    return [tuple(Fraction(x) for x in row) for row in rows[1:] if row]

