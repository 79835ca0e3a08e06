"""Reference interpreter producing return value, memory and dynamic trace."""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import NamedTuple

from .inputs import Inputs
from .nodes import Br, Function, Jmp, Module, wrap64

DEFAULT_STEP_BUDGET = 10_000_000


class TraceEntry(NamedTuple):
    block: str
    index: int
    opcode: str
    values: tuple[int, ...]


class InterpreterError(RuntimeError):
    pass


class InterpreterTrap(InterpreterError):
    """A trapping instruction (division by zero, out-of-bounds access).

    ``kind`` and ``detail`` describe the fault independently of where the
    faulting instruction sits, so traps can be compared across transformed
    programs.
    """

    def __init__(self, kind: str, detail: str, where: str, trace: list[TraceEntry]):
        super().__init__(f"trap at {where}: {detail}")
        self.kind = kind
        self.detail = detail
        self.trace = trace


class NonTermination(InterpreterError):
    def __init__(self, budget: int, trace: list[TraceEntry]):
        super().__init__(f"nontermination suspected: step budget of {budget} exceeded")
        self.trace = trace


@dataclass(frozen=True)
class ExecResult:
    value: int
    memory: dict[str, tuple[int, ...]]
    trace: tuple[TraceEntry, ...]
    branches: tuple[tuple[str, bool], ...]
    steps: int

    def stores(self) -> list[tuple[int, ...]]:
        return [e.values for e in self.trace if e.opcode == "store"]


def branch_sites(m: Module) -> dict[tuple[str, str], str]:
    """Map ``(function, block)`` of every br to its site id ``b0``, ``b1``, ...

    Sites are numbered in function order, then dominator-tree post-order.
    """
    from .cfg import analyze_cfg

    out, k = {}, 0
    for f in m.functions:
        bm = f.block_map()
        for lab in analyze_cfg(f).postorder:
            if isinstance(bm[lab].terminator, Br):
                out[(f.name, lab)] = f"b{k}"
                k += 1
    return out


def _div(a, b):
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


_BINOPS = {
    "add": lambda a, b: wrap64(a + b),
    "sub": lambda a, b: wrap64(a - b),
    "mul": lambda a, b: wrap64(a * b),
    "div": lambda a, b: wrap64(_div(a, b)),
    "rem": lambda a, b: a - b * _div(a, b),
    "and": lambda a, b: a & b,
    "or": lambda a, b: a | b,
    "xor": lambda a, b: a ^ b,
    "shl": lambda a, b: wrap64(a << (b & 63)),
    "shr": lambda a, b: a >> (b & 63),
    "icmp.eq": lambda a, b: int(a == b),
    "icmp.ne": lambda a, b: int(a != b),
    "icmp.slt": lambda a, b: int(a < b),
    "icmp.sle": lambda a, b: int(a <= b),
    "icmp.sgt": lambda a, b: int(a > b),
    "icmp.sge": lambda a, b: int(a >= b),
}

_compiled: OrderedDict[int, tuple] = OrderedDict()


def _compile(m: Module, f: Function):
    key = id(f)
    hit = _compiled.get(key)
    if hit is not None and hit[0] is f and hit[1] is m:
        _compiled.move_to_end(key)
        return hit[2]
    sites = {lab: s for (fname, lab), s in branch_sites(m).items() if fname == f.name}
    blocks = {}
    for b in f.blocks:
        phis = [(p.result, dict(p.incoming)) for p in b.phis]
        body = [(ins.opcode, ins.result, ins.operands, ins.mem, _BINOPS.get(ins.opcode))
                for ins in b.body]
        blocks[b.label] = (phis, body, b.terminator, sites.get(b.label))
    _compiled[key] = (f, m, blocks)
    if len(_compiled) > 512:
        _compiled.popitem(last=False)
    return blocks


def interpret(m: Module, fn: str, inputs: Inputs, budget: int = DEFAULT_STEP_BUDGET) -> ExecResult:
    """Run ``fn`` in ``m`` on ``inputs``.

    Arithmetic wraps at 64 bits; ``div``/``rem`` truncate toward zero and
    trap on a zero divisor; ``shl``/``shr`` use the low six bits of the
    shift amount and ``shr`` is arithmetic.  Raises :class:`InterpreterTrap`
    or :class:`NonTermination`, each carrying the trace prefix.
    """
    f = m.function(fn)
    missing = [p for p in f.params if p not in inputs.params]
    if missing:
        raise InterpreterError(f"@{fn}: no value for parameter(s) {', '.join('%' + p for p in missing)}")
    blocks = _compile(m, f)
    mem = inputs.memory_image(m)

    env = {p: wrap64(inputs.params[p]) for p in f.params}
    trace: list[TraceEntry] = []
    branches: list[tuple[str, bool]] = []
    emit = trace.append
    steps = 0
    label, prev = f.entry.label, None

    def val(o):
        return o if o.__class__ is int else env[o]

    while True:
        phis, body, term, site = blocks[label]
        steps += len(phis) + len(body) + 1
        if steps > budget:
            raise NonTermination(budget, trace)
        if phis:
            incoming = [val(inc[prev]) for _, inc in phis]
            for i, ((res, _), v) in enumerate(zip(phis, incoming)):
                env[res] = v
                emit(TraceEntry(label, i, "phi", (v,)))
        idx = len(phis)
        for opcode, res, ops, memname, fn_ in body:
            if fn_ is not None:
                a, b = val(ops[0]), val(ops[1])
                if b == 0 and (opcode == "div" or opcode == "rem"):
                    emit(TraceEntry(label, idx, opcode, (a, b)))
                    raise InterpreterTrap("div-by-zero", f"{opcode} by zero",
                                          f"@{fn}:{label}[{idx}]", trace)
                env[res] = fn_(a, b)
                emit(TraceEntry(label, idx, opcode, (a, b)))
            elif opcode == "select":
                c, x, y = val(ops[0]), val(ops[1]), val(ops[2])
                env[res] = x if c != 0 else y
                emit(TraceEntry(label, idx, opcode, (c, x, y)))
            else:
                cells = mem[memname]
                i = val(ops[0])
                if opcode == "load":
                    emit(TraceEntry(label, idx, opcode, (i,)))
                    if not 0 <= i < len(cells):
                        raise InterpreterTrap(
                            "out-of-bounds", f"load index {i} out of bounds for @{memname}[{len(cells)}]",
                            f"@{fn}:{label}[{idx}]", trace)
                    env[res] = cells[i]
                else:
                    v = val(ops[1])
                    emit(TraceEntry(label, idx, opcode, (i, v)))
                    if not 0 <= i < len(cells):
                        raise InterpreterTrap(
                            "out-of-bounds", f"store index {i} out of bounds for @{memname}[{len(cells)}]",
                            f"@{fn}:{label}[{idx}]", trace)
                    cells[i] = v
            idx += 1
        if term.__class__ is Br:
            c = val(term.cond)
            taken = c != 0
            emit(TraceEntry(label, idx, "br", (c,)))
            branches.append((site, taken))
            prev, label = label, term.if_true if taken else term.if_false
        elif term.__class__ is Jmp:
            emit(TraceEntry(label, idx, "jmp", ()))
            prev, label = label, term.target
        else:
            v = val(term.value)
            emit(TraceEntry(label, idx, "ret", (v,)))
            return ExecResult(
                value=v,
                memory={k: tuple(c) for k, c in mem.items()},
                trace=tuple(trace),
                branches=tuple(branches),
                steps=steps,
            )
