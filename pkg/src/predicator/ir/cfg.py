"""Control-flow analyses: predecessors, dominators, dominator-tree post-order
and natural-loop nesting depth."""

from __future__ import annotations

from dataclasses import dataclass

from .nodes import Function


class CfgError(ValueError):
    def __init__(self, message: str, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


@dataclass(frozen=True)
class CfgInfo:
    preds: dict[str, tuple[str, ...]]
    succs: dict[str, tuple[str, ...]]
    idom: dict[str, str | None]
    postorder: tuple[str, ...]
    loop_depth: dict[str, int]

    def dominates(self, a: str, b: str) -> bool:
        """True if block ``a`` dominates block ``b`` (reflexive)."""
        while b is not None:
            if a == b:
                return True
            b = self.idom[b]
        return False

    def dom_children(self, label: str) -> list[str]:
        return [b for b, d in self.idom.items() if d == label]


def predecessors(f: Function) -> dict[str, tuple[str, ...]]:
    """Predecessor lists in block order; a block that reaches ``b`` through
    both br arms is listed once."""
    preds: dict[str, list[str]] = {b.label: [] for b in f.blocks}
    for b in f.blocks:
        for s in dict.fromkeys(b.successors):
            if s in preds:
                preds[s].append(b.label)
    return {k: tuple(v) for k, v in preds.items()}


def reachable(f: Function) -> list[str]:
    """Blocks reachable from entry, in DFS preorder."""
    bm = f.block_map()
    seen, order, stack = set(), [], [f.entry.label]
    while stack:
        lab = stack.pop()
        if lab in seen or lab not in bm:
            continue
        seen.add(lab)
        order.append(lab)
        stack.extend(reversed(bm[lab].successors))
    return order


def _reverse_postorder(f: Function) -> list[str]:
    bm = f.block_map()
    seen, post = set(), []

    def visit(lab):
        seen.add(lab)
        for s in bm[lab].successors:
            if s not in seen:
                visit(s)
        post.append(lab)

    visit(f.entry.label)
    return post[::-1]


def _immediate_dominators(f, preds) -> dict[str, str | None]:
    # Cooper, Harvey & Kennedy iterative scheme over reverse post-order
    rpo = _reverse_postorder(f)
    index = {lab: i for i, lab in enumerate(rpo)}
    entry = rpo[0]
    idom = {entry: entry}

    def intersect(a, b):
        while a != b:
            while index[a] > index[b]:
                a = idom[a]
            while index[b] > index[a]:
                b = idom[b]
        return a

    changed = True
    while changed:
        changed = False
        for lab in rpo[1:]:
            done = [p for p in preds[lab] if p in idom]
            new = done[0]
            for p in done[1:]:
                new = intersect(p, new)
            if idom.get(lab) != new:
                idom[lab] = new
                changed = True
    idom[entry] = None
    return idom


def _loop_depths(f, preds, info_dominates) -> dict[str, int]:
    depth = {b.label: 0 for b in f.blocks}
    bodies: dict[str, set[str]] = {}
    for b in f.blocks:
        for s in b.successors:
            if info_dominates(s, b.label):
                body = bodies.setdefault(s, {s})
                stack = [b.label]
                while stack:
                    n = stack.pop()
                    if n not in body:
                        body.add(n)
                        stack.extend(preds[n])
    for body in bodies.values():
        for n in body:
            depth[n] += 1
    return depth


def analyze_cfg(f: Function) -> CfgInfo:
    """Compute :class:`CfgInfo` for ``f``.

    The dominator-tree post-order visits children in block-list order.
    Natural loops sharing a header are merged into one loop.  Raises
    :class:`CfgError` if any block is unreachable or a branch names a
    missing label.
    """
    from .validate import Diagnostic

    labels = {b.label for b in f.blocks}
    for b in f.blocks:
        for s in b.successors:
            if s not in labels:
                d = Diagnostic("unknown-label", f.name, b.label, None, f"branch to unknown label '{s}'")
                raise CfgError(str(d), [d])
    live = set(reachable(f))
    dead = [b.label for b in f.blocks if b.label not in live]
    if dead:
        diags = [Diagnostic("unreachable", f.name, lab, None, f"block '{lab}' is unreachable")
                 for lab in dead]
        raise CfgError(f"@{f.name}: unreachable blocks: {', '.join(dead)}", diags)

    preds = predecessors(f)
    succs = {b.label: tuple(dict.fromkeys(b.successors)) for b in f.blocks}
    idom = _immediate_dominators(f, preds)

    order = [b.label for b in f.blocks]
    children: dict[str, list[str]] = {lab: [] for lab in order}
    for lab in order:
        if idom[lab] is not None:
            children[idom[lab]].append(lab)
    post = []
    stack = [(f.entry.label, iter(children[f.entry.label]))]
    while stack:
        lab, it = stack[-1]
        child = next(it, None)
        if child is None:
            post.append(lab)
            stack.pop()
        else:
            stack.append((child, iter(children[child])))

    partial = CfgInfo(preds, succs, idom, tuple(post), {})
    depth = _loop_depths(f, preds, partial.dominates)
    return CfgInfo(preds, succs, idom, tuple(post), depth)
