"""Structural and SSA validation."""

from __future__ import annotations

from dataclasses import dataclass

from .nodes import ARITY, OPCODES, Function, Module


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    function: str
    block: str | None
    index: int | None
    message: str

    def __str__(self) -> str:
        loc = f"@{self.function}"
        if self.block is not None:
            loc += f":{self.block}"
            if self.index is not None:
                loc += f"[{self.index}]"
        return f"{loc}: {self.rule}: {self.message}"


def validate_module(m: Module) -> list[Diagnostic]:
    """Return every rule violation in ``m``; an empty list means valid.

    Instruction indices count phis first, then body, then the terminator.
    """
    diags: list[Diagnostic] = []
    seen = set()
    for f in m.functions:
        if f.name in seen:
            diags.append(Diagnostic("duplicate-function", f.name, None, None,
                                    f"function '@{f.name}' defined twice"))
        seen.add(f.name)
    mem_names = [d.name for d in m.memories]
    for name in sorted({n for n in mem_names if mem_names.count(n) > 1}):
        diags.append(Diagnostic("duplicate-memory", "", None, None, f"memory '@{name}' declared twice"))
    for f in m.functions:
        diags.extend(validate_function(f, set(mem_names)))
    return diags


def validate_function(f: Function, memories: set[str]) -> list[Diagnostic]:
    from .cfg import CfgError, analyze_cfg

    out: list[Diagnostic] = []

    def err(rule, block, index, msg):
        out.append(Diagnostic(rule, f.name, block, index, msg))

    if not f.blocks:
        err("no-blocks", None, None, "function has no blocks")
        return out

    labels = [b.label for b in f.blocks]
    for lab in sorted({x for x in labels if labels.count(x) > 1}):
        err("duplicate-label", lab, None, f"label '{lab}' defined twice")
    if len(set(labels)) != len(labels):
        return out

    # definitions: name -> (block, index)
    defs: dict[str, tuple[str | None, int]] = {}
    for p in f.params:
        if p in defs:
            err("multiple-def", None, None, f"parameter '%{p}' repeated")
        defs[p] = (None, -1)
    for b in f.blocks:
        for i, ins in enumerate((*b.phis, *b.body)):
            if ins.result is None:
                continue
            if ins.result in defs:
                err("multiple-def", b.label, i, f"'%{ins.result}' defined more than once")
            else:
                defs[ins.result] = (b.label, i)

    for b in f.blocks:
        for s in b.successors:
            if s not in labels:
                err("unknown-label", b.label, len(b) - 1, f"branch to unknown label '{s}'")
        np = len(b.phis)
        for i, ins in enumerate(b.body, start=np):
            if ins.opcode not in OPCODES:
                err("unknown-opcode", b.label, i, f"unknown opcode '{ins.opcode}'")
                continue
            if len(ins.operands) != ARITY[ins.opcode]:
                err("arity", b.label, i, f"'{ins.opcode}' takes {ARITY[ins.opcode]} operands")
            if ins.opcode in ("load", "store"):
                if ins.mem not in memories:
                    err("unknown-memory", b.label, i, f"memory '@{ins.mem}' is not declared")
            if (ins.opcode == "store") != (ins.result is None):
                err("result-mismatch", b.label, i, "store has no result; every other opcode has one")
    if out:
        return out

    try:
        cfg = analyze_cfg(f)
    except CfgError as e:
        return out + e.diagnostics

    def check_use(name, block, index, at_end_of=None):
        """``at_end_of`` is the predecessor for phi incoming values."""
        if name not in defs:
            err("undefined-value", block, index, f"'%{name}' is never defined")
            return
        dblock, dindex = defs[name]
        if dblock is None:
            return
        use_block = at_end_of or block
        if dblock == use_block:
            if at_end_of is None and dindex >= index:
                err("def-before-use", block, index, f"'%{name}' used before its definition")
        elif not cfg.dominates(dblock, use_block):
            err("not-dominated", block, index,
                f"definition of '%{name}' in '{dblock}' does not dominate its use")

    if cfg.preds[f.entry.label]:
        err("entry-has-preds", f.entry.label, None, "the entry block cannot be a branch target")
    for b in f.blocks:
        preds = set(cfg.preds[b.label])
        for i, phi in enumerate(b.phis):
            inc = [lab for lab, _ in phi.incoming]
            if len(set(inc)) != len(inc) or set(inc) != preds:
                err("phi-pred-mismatch", b.label, i,
                    f"phi '%{phi.result}' incoming {sorted(inc)} != predecessors {sorted(preds)}")
            for lab, v in phi.incoming:
                if isinstance(v, str) and lab in preds:
                    check_use(v, b.label, i, at_end_of=lab)
        np = len(b.phis)
        for i, ins in enumerate(b.body, start=np):
            for v in ins.uses():
                check_use(v, b.label, i)
        for v in b.terminator.uses():
            check_use(v, b.label, len(b) - 1)
    return out
