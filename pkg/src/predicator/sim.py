"""Trace-driven cycle model with branch prediction.

The interpreter supplies the dynamic instruction stream; this module only
assigns issue cycles to it.  Issue is in order, at most ``issue_width``
instructions per cycle, each waiting for its operands.  A mispredicted
``br`` stalls every later instruction until it resolves plus the
misprediction penalty.  ``phi`` and ``jmp`` take no issue slot.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .ir import Inputs, Module, interpret
from .ir.interp import DEFAULT_STEP_BUDGET
from .ir.nodes import ICMP_OPS

PREDICTORS = ("twobit", "always_taken", "oracle")


def default_latencies() -> dict[str, int]:
    lat = {op: 1 for op in ("add", "sub", "and", "or", "xor", "shl", "shr", "select", "store")}
    lat.update({op: 1 for op in ICMP_OPS})
    lat.update({"mul": 3, "load": 3, "div": 12, "rem": 12, "br": 1, "jmp": 0, "phi": 0, "ret": 1})
    return lat


@dataclass(frozen=True)
class MachineModel:
    issue_width: int = 4
    mispredict_penalty: int = 14
    assumed_misrate: Fraction = Fraction(1, 4)
    predictor: str = "twobit"
    latency: dict[str, int] = field(default_factory=default_latencies)

    def __post_init__(self):
        if self.issue_width < 1:
            raise ValueError("issue_width must be >= 1")
        if self.mispredict_penalty < 0:
            raise ValueError("mispredict_penalty must be >= 0")
        if not 0 <= self.assumed_misrate <= 1:
            raise ValueError("assumed_misrate must lie in [0, 1]")
        if self.predictor not in PREDICTORS:
            raise ValueError(f"unknown predictor {self.predictor!r}; choose from {', '.join(PREDICTORS)}")
        if any(v < 0 for v in self.latency.values()):
            raise ValueError("latencies must be non-negative")

    def lat(self, opcode: str) -> int:
        return self.latency[opcode]

    def with_(self, **kw) -> MachineModel:
        return replace(self, **kw)

    def to_text(self) -> str:
        lines = [
            f"issue_width = {self.issue_width}",
            f"mispredict_penalty = {self.mispredict_penalty}",
            f"assumed_misrate = {self.assumed_misrate}",
            f"predictor = {self.predictor}",
        ]
        lines += [f"latency.{op} = {v}" for op, v in sorted(self.latency.items())]
        return "\n".join(lines) + "\n"


def parse_machine(text: str) -> MachineModel:
    """Read a ``key = value`` machine file.

    ``latency.icmp`` sets every ``icmp.*`` latency at once; a more specific
    key such as ``latency.icmp.slt`` wins regardless of order.
    """
    kw: dict = {}
    lat = default_latencies()
    family, exact = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"([\w.]+)\s*=\s*(\S+)", line)
        if m is None:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = m.groups()
        try:
            if key in ("issue_width", "mispredict_penalty"):
                kw[key] = int(value)
            elif key == "assumed_misrate":
                kw[key] = Fraction(value)
            elif key == "predictor":
                kw[key] = value
            elif key.startswith("latency."):
                op = key[len("latency."):]
                if op == "icmp":
                    family.update({o: int(value) for o in ICMP_OPS})
                elif op in lat:
                    exact[op] = int(value)
                else:
                    raise ValueError(f"unknown opcode {op!r}")
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as e:
            raise ValueError(f"line {lineno}: {e}") from None
    lat.update(family)
    lat.update(exact)
    return MachineModel(latency=lat, **kw)


class PredictorState:
    """Per-site 2-bit saturating counters, fresh sites start at 1."""

    def __init__(self, counters: dict[str, int] | None = None):
        self.counters = dict(counters or {})

    def counter(self, site: str) -> int:
        return self.counters.get(site, 1)


def predict_and_update(s: PredictorState, site: str, taken: bool) -> tuple[bool, PredictorState]:
    """Return the prediction made before the update and the updated state."""
    c = s.counter(site)
    prediction = c >= 2
    new = PredictorState(s.counters)
    new.counters[site] = min(3, c + 1) if taken else max(0, c - 1)
    return prediction, new


@dataclass(frozen=True)
class SimResult:
    cycles: int
    instructions: int
    branches: int
    mispredictions: int
    site_mispredictions: dict[str, int]
    value: int = 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cycles", "instructions", "branches", "mispredictions"])
        w.writerow([self.cycles, self.instructions, self.branches, self.mispredictions])
        w.writerow([])
        w.writerow(["site", "mispredictions"])
        for site, n in sorted(self.site_mispredictions.items(), key=lambda kv: int(kv[0][1:])):
            w.writerow([site, n])
        return buf.getvalue()


def _static_table(m: Module, fn: str):
    f = m.function(fn)
    table = {}
    for b in f.blocks:
        for i, p in enumerate(b.phis):
            table[(b.label, i)] = ("phi", p.result, dict(p.incoming), None)
        for i, ins in enumerate(b.body, start=len(b.phis)):
            uses = tuple(o for o in ins.operands if isinstance(o, str))
            table[(b.label, i)] = (ins.opcode, ins.result, uses, ins.mem)
        t = b.terminator
        table[(b.label, len(b) - 1)] = (t.opcode, None, tuple(t.uses()), None)
    return table


def schedule_trace(m: Module, fn: str, trace, branches, mm: MachineModel) -> SimResult:
    """Assign cycles to an already computed dynamic trace."""
    table = _static_table(m, fn)
    lat = mm.latency
    width = mm.issue_width
    penalty = mm.mispredict_penalty
    predictor = mm.predictor

    ready: dict[str, int] = {}
    store_ready: dict[str, int] = {}
    counters: dict[str, int] = {}
    site_miss: dict[str, int] = {}
    fetch_ready = 0
    cur_cycle, used = 0, 0
    cycles = 0
    nbr = nmiss = 0
    br_iter = iter(branches)
    prev_block = None
    pending_phi: list[tuple[str, int]] = []

    for entry in trace:
        key = (entry.block, entry.index)
        opcode, result, uses, mem = table[key]
        if opcode == "phi":
            src = uses[prev_block]
            pending_phi.append((result, ready.get(src, 0) if isinstance(src, str) else 0))
            continue
        if pending_phi:
            # phis of one block read their sources in parallel
            for res, t in pending_phi:
                ready[res] = t
            pending_phi.clear()
        if opcode == "jmp":
            prev_block = entry.block
            continue

        t = fetch_ready if fetch_ready > cur_cycle else cur_cycle
        for u in uses:
            r = ready.get(u, 0)
            if r > t:
                t = r
        if mem is not None:
            r = store_ready.get(mem, 0)
            if r > t:
                t = r
        if t == cur_cycle:
            if used >= width:
                t += 1
                used = 0
        else:
            used = 0
        cur_cycle = t
        used += 1
        done = t + lat[opcode]
        if done > cycles:
            cycles = done
        if result is not None:
            ready[result] = done
        elif opcode == "store":
            if done > store_ready.get(mem, 0):
                store_ready[mem] = done
        if opcode == "br":
            site, taken = next(br_iter)
            nbr += 1
            if predictor == "twobit":
                c = counters.get(site, 1)
                pred = c >= 2
                counters[site] = (c + 1 if c < 3 else 3) if taken else (c - 1 if c > 0 else 0)
            elif predictor == "always_taken":
                pred = True
            else:
                pred = taken
            if pred != taken:
                nmiss += 1
                site_miss[site] = site_miss.get(site, 0) + 1
                if done + penalty > fetch_ready:
                    fetch_ready = done + penalty
            prev_block = entry.block
        elif opcode == "ret":
            prev_block = entry.block
    return SimResult(cycles, len(trace), nbr, nmiss, site_miss)


def simulate(m: Module, fn: str, inputs: Inputs, mm: MachineModel,
             budget: int = DEFAULT_STEP_BUDGET) -> SimResult:
    """Interpret ``fn`` on ``inputs`` and cost the resulting trace.

    Interpreter traps and step-budget errors propagate unchanged.
    """
    r = interpret(m, fn, inputs, budget=budget)
    res = schedule_trace(m, fn, r.trace, r.branches, mm)
    return replace(res, value=r.value)


def speedup(base: SimResult, cand: SimResult) -> Fraction:
    """``base.cycles / cand.cycles`` as an exact fraction."""
    if base.cycles <= 0 or cand.cycles <= 0:
        raise ValueError("speedup is undefined for zero-cycle runs")
    return Fraction(base.cycles, cand.cycles)

