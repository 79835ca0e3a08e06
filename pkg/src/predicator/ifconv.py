"""Bitmask-controlled if-conversion of triangle and diamond branches.

A candidate is a ``br`` whose arms form one of three shapes::

    triangle-true      triangle-false     diamond
       head               head              head
       |   \\              /   |            /    \\
       |   side        side   |         true    false
       |   /              \\   |            \\    /
       join               join              join

Side blocks must have the head as sole predecessor, end in ``jmp join``
and contain only speculatable instructions.  Conversion hoists the side
bodies into the head, lowers each join phi to a ``select`` on the branch
condition and replaces the ``br`` with ``jmp join``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .ir import (
    BasicBlock, Br, CfgInfo, Function, Instruction, Jmp, Module, Phi,
    analyze_cfg, branch_sites,
)

SHAPES = ("triangle-true", "triangle-false", "diamond")
OUTCOMES = ("converted", "skipped-bit-0", "skipped-became-illegal")


class LegalityError(ValueError):
    pass


class BitmaskLengthError(ValueError):
    def __init__(self, expected: int, actual: int):
        super().__init__(f"bitmask length mismatch: expected {expected}, got {actual}")
        self.expected = expected
        self.actual = actual


@dataclass(frozen=True)
class Candidate:
    index: int
    site: str
    function: str
    shape: str
    head: str
    true_side: str | None
    false_side: str | None
    join: str
    phis: tuple[str, ...] = ()

    @property
    def sides(self) -> tuple[str, ...]:
        return tuple(s for s in (self.true_side, self.false_side) if s is not None)

    @property
    def true_pred(self) -> str:
        """Join predecessor reached when the condition holds."""
        return self.true_side or self.head

    @property
    def false_pred(self) -> str:
        return self.false_side or self.head


@dataclass(frozen=True)
class Legality:
    legal: bool
    reasons: tuple[str, ...]
    candidate: Candidate | None = None


def parse_bitmask(text: str) -> tuple[bool, ...]:
    text = text.strip()
    if any(ch not in "01" for ch in text):
        raise ValueError(f"bitmask must contain only 0 and 1, got {text!r}")
    return tuple(ch == "1" for ch in text)


def format_bitmask(bits: Iterable) -> str:
    return "".join("1" if b else "0" for b in bits)


def _classify(f: Function, cfg: CfgInfo, head: str):
    """Return ``(shape, true_side, false_side, join)`` or a reason list."""
    term = f.block(head).terminator
    t, e = term.if_true, term.if_false
    if t == e or head in (t, e):
        return ["critical-edge"]
    entry = f.entry.label
    bm = f.block_map()

    def is_side(lab):
        return (lab != entry and cfg.preds[lab] == (head,)
                and isinstance(bm[lab].terminator, Jmp))

    if is_side(t) and bm[t].terminator.target == e:
        return ("triangle-true", t, None, e)
    if is_side(e) and bm[e].terminator.target == t:
        return ("triangle-false", None, e, t)
    if is_side(t) and is_side(e):
        j = bm[t].terminator.target
        if j == bm[e].terminator.target and j not in (t, e):
            if j == head:
                return ["critical-edge"]
            return ("diamond", t, e, j)
        return ["side-exit"]
    reasons = []
    for lab in (t, e):
        if len(cfg.preds[lab]) > 1:
            reasons.append("multi-pred")
        elif lab == entry:
            reasons.append("critical-edge")
    return sorted(set(reasons)) or ["side-exit"]


def _speculation_reasons(b: BasicBlock, memories: Mapping[str, int] | None) -> list[str]:
    reasons = []
    if b.phis:
        reasons.append("phi-in-side")
    for ins in b.body:
        op = ins.opcode
        if op == "store":
            reasons.append("side-effect")
        elif op in ("div", "rem"):
            d = ins.operands[1]
            if not isinstance(d, int) or d == 0:
                reasons.append("speculation-unsafe")
        elif op == "load":
            i = ins.operands[0]
            limit = None if memories is None else memories.get(ins.mem, 0)
            if not isinstance(i, int) or i < 0 or (limit is not None and i >= limit):
                reasons.append("speculation-unsafe")
    return reasons


def check_legality(f: Function, site: str, cfg: CfgInfo | None = None,
                   memories: Mapping[str, int] | None = None) -> Legality:
    """Decide whether the ``br`` ending block ``site`` can be if-converted.

    ``memories`` maps memory names to lengths so constant-index loads can be
    bounds-checked; when omitted, any non-negative constant index is
    accepted.  The returned :class:`Legality` carries a candidate (with
    ``index=-1``) whenever the shape matched.
    """
    try:
        b = f.block(site)
    except KeyError:
        raise LegalityError(f"@{f.name}: unknown branch site '{site}'") from None
    if not isinstance(b.terminator, Br):
        raise LegalityError(f"@{f.name}: block '{site}' does not end in br")
    cfg = cfg or analyze_cfg(f)
    shape = _classify(f, cfg, site)
    if isinstance(shape, list):
        return Legality(False, tuple(shape))
    kind, t, e, j = shape
    join = f.block(j)
    cand = Candidate(-1, "", f.name, kind, site, t, e, j, tuple(p.result for p in join.phis))

    reasons: list[str] = []
    for lab in cand.sides:
        reasons += _speculation_reasons(f.block(lab), memories)
    for p in join.phis:
        preds = {lab for lab, _ in p.incoming}
        if cand.true_pred not in preds or cand.false_pred not in preds:
            reasons.append("phi-not-selectable")
    reasons = list(dict.fromkeys(reasons))
    return Legality(not reasons, tuple(reasons), cand)


def find_candidates(f: Function, cfg: CfgInfo | None = None,
                    memories: Mapping[str, int] | None = None,
                    start: int = 0, sites: Mapping[str, str] | None = None) -> list[Candidate]:
    """Legal candidates of ``f`` in dominator-tree post-order of their heads.

    Indices run densely from ``start``; ``sites`` maps head labels to
    module-wide branch-site ids.
    """
    cfg = cfg or analyze_cfg(f)
    bm = f.block_map()
    out = []
    for lab in cfg.postorder:
        if not isinstance(bm[lab].terminator, Br):
            continue
        leg = check_legality(f, lab, cfg, memories)
        if leg.legal:
            site = sites.get(lab, "") if sites else ""
            out.append(replace(leg.candidate, index=start + len(out), site=site))
    return out


def module_candidates(m: Module) -> list[Candidate]:
    """All candidates of ``m``, concatenated in function order."""
    mems = {d.name: d.length for d in m.memories}
    sites = branch_sites(m)
    out: list[Candidate] = []
    for f in m.functions:
        fsites = {lab: s for (fn, lab), s in sites.items() if fn == f.name}
        out += find_candidates(f, analyze_cfg(f), mems, start=len(out), sites=fsites)
    return out


def _fresh(name: str, taken: set[str]) -> str:
    cand, k = f"{name}.sel", 1
    while cand in taken:
        k += 1
        cand = f"{name}.sel{k}"
    taken.add(cand)
    return cand


def convert_candidate(f: Function, c: Candidate, cfg: CfgInfo | None = None,
                      memories: Mapping[str, int] | None = None) -> Function:
    """If-convert candidate ``c`` in ``f`` and return the new function.

    Raises :class:`LegalityError` (leaving ``f`` untouched) when ``c`` no
    longer describes a legal triangle/diamond of ``f``.
    """
    try:
        leg = check_legality(f, c.head, cfg, memories)
    except LegalityError as e:
        raise LegalityError(f"legality violated: {e}") from None
    now = leg.candidate
    if not leg.legal or now is None or (now.shape, now.true_side, now.false_side, now.join) != (
            c.shape, c.true_side, c.false_side, c.join):
        why = ", ".join(leg.reasons) or "shape changed"
        raise LegalityError(f"legality violated for @{f.name}:{c.head} ({why})")

    bm = f.block_map()
    head, join = bm[c.head], bm[c.join]
    cond = head.terminator.cond
    cfg = cfg or analyze_cfg(f)
    dead = set(c.sides)
    outer_preds = [p for p in cfg.preds[c.join] if p not in dead and p != c.head]

    names = set(f.params)
    for b in f.blocks:
        names.update(x.result for x in (*b.phis, *b.body) if x.result is not None)

    body = list(head.body)
    for lab in c.sides:
        body += bm[lab].body
    new_phis = []
    for p in join.phis:
        tv, fv = p.value_from(c.true_pred), p.value_from(c.false_pred)
        if outer_preds:
            sel = _fresh(p.result, names)
            rest = tuple((lab, v) for lab, v in p.incoming
                         if lab not in dead and lab != c.head)
            new_phis.append(Phi(p.result, ((c.head, sel), *rest)))
        else:
            sel = p.result
        body.append(Instruction(sel, "select", (cond, tv, fv)))

    new_head = replace(head, body=tuple(body), terminator=Jmp(c.join))
    new_join = replace(join, phis=tuple(new_phis))
    blocks = []
    for b in f.blocks:
        if b.label in dead:
            continue
        blocks.append(new_head if b.label == c.head else new_join if b.label == c.join else b)
    return f.with_blocks(blocks)


@dataclass(frozen=True)
class ApplyEntry:
    index: int
    site: str
    bit: bool
    outcome: str


@dataclass(frozen=True)
class ApplyReport:
    entries: tuple[ApplyEntry, ...]

    @property
    def converted(self) -> int:
        return sum(e.outcome == "converted" for e in self.entries)

    def to_csv(self, delimiter: str = ",") -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
        w.writerow(["index", "branch_site", "bit", "outcome"])
        for e in self.entries:
            w.writerow([e.index, e.site, int(e.bit), e.outcome])
        return buf.getvalue()


def apply_bitmask(m: Module, bits: Sequence | str,
                  candidates: Sequence[Candidate] | None = None) -> tuple[Module, ApplyReport]:
    """Convert every candidate whose bit is set.

    Candidates are taken from the original module (or passed in, already
    discovered) and processed in index order, re-checking legality against
    the partially converted function before each conversion.
    """
    if isinstance(bits, str):
        bits = parse_bitmask(bits)
    bits = tuple(bool(b) for b in bits)
    if candidates is None:
        candidates = module_candidates(m)
    if len(bits) != len(candidates):
        raise BitmaskLengthError(len(candidates), len(bits))
    mems = {d.name: d.length for d in m.memories}
    funcs = {f.name: f for f in m.functions}
    entries = []
    for c, bit in zip(candidates, bits):
        if not bit:
            entries.append(ApplyEntry(c.index, c.site, False, "skipped-bit-0"))
            continue
        try:
            funcs[c.function] = convert_candidate(funcs[c.function], c, memories=mems)
            outcome = "converted"
        except LegalityError:
            outcome = "skipped-became-illegal"
        entries.append(ApplyEntry(c.index, c.site, True, outcome))
    out = replace(m, functions=tuple(funcs[f.name] for f in m.functions))
    return out, ApplyReport(tuple(entries))


def baseline_decide(fv, mm) -> bool:
    """Static profitability rule used as the fitness reference point.

    Convert when the critical-path extension stays within half the
    misprediction penalty and the expected misprediction cost
    (``assumed_misrate * penalty``) covers the issue cost of the cheaper
    present side.
    """
    extension = fv.merged_cp - max(fv.true_cp, fv.false_cp)
    if extension > Fraction(mm.mispredict_penalty, 2):
        return False
    sides = [x for x in (fv.true_latency, fv.false_latency) if x is not None]
    nullified = Fraction(min(sides), mm.issue_width) if sides else Fraction(0)
    return Fraction(mm.assumed_misrate) * mm.mispredict_penalty >= nullified
