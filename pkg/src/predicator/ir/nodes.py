"""Immutable IR node types.

Values are referred to by bare name (``"x"`` for ``%x``); immediates are
plain Python ints.  Every node is a frozen dataclass, so structural equality
and hashing come for free.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Union

Operand = Union[str, int]

BINARY_OPS = frozenset({
    "add", "sub", "mul", "div", "rem", "and", "or", "xor", "shl", "shr",
})
ICMP_OPS = frozenset({
    "icmp.eq", "icmp.ne", "icmp.slt", "icmp.sle", "icmp.sgt", "icmp.sge",
})
OPCODES = BINARY_OPS | ICMP_OPS | {"select", "load", "store"}

# operand count per opcode; load/store additionally name a memory
ARITY = {op: 2 for op in BINARY_OPS | ICMP_OPS}
ARITY.update({"select": 3, "load": 1, "store": 2})

INT_MIN = -(1 << 63)
INT_MAX = (1 << 63) - 1


def wrap64(v: int) -> int:
    """Reduce an arbitrary int to signed 64-bit two's complement."""
    v &= 0xFFFFFFFFFFFFFFFF
    return v - (1 << 64) if v & (1 << 63) else v


def fmt_operand(op: Operand) -> str:
    return str(op) if isinstance(op, int) else f"%{op}"


@dataclass(frozen=True)
class MemoryDecl:
    name: str
    length: int


@dataclass(frozen=True)
class Instruction:
    """A body instruction.

    ``load`` has operands ``(index,)`` and ``store`` has ``(index, value)``;
    both carry the memory name in ``mem``.  ``store`` has no result.
    """

    result: str | None
    opcode: str
    operands: tuple[Operand, ...]
    mem: str | None = None

    def uses(self) -> Iterator[str]:
        return (o for o in self.operands if isinstance(o, str))

    def __str__(self) -> str:
        ops = [fmt_operand(o) for o in self.operands]
        if self.mem is not None:
            ops.insert(0, f"@{self.mem}")
        text = f"{self.opcode} {', '.join(ops)}"
        return f"%{self.result} = {text}" if self.result is not None else text


@dataclass(frozen=True)
class Phi:
    result: str
    incoming: tuple[tuple[str, Operand], ...]

    def uses(self) -> Iterator[str]:
        return (v for _, v in self.incoming if isinstance(v, str))

    def value_from(self, label: str) -> Operand:
        for pred, v in self.incoming:
            if pred == label:
                return v
        raise KeyError(label)

    def __str__(self) -> str:
        parts = ", ".join(f"[{lab}: {fmt_operand(v)}]" for lab, v in self.incoming)
        return f"%{self.result} = phi {parts}"


@dataclass(frozen=True)
class Br:
    cond: Operand
    if_true: str
    if_false: str
    opcode = "br"

    @property
    def targets(self) -> tuple[str, ...]:
        return (self.if_true, self.if_false)

    def uses(self) -> Iterator[str]:
        return iter([self.cond] if isinstance(self.cond, str) else [])

    def __str__(self) -> str:
        return f"br {fmt_operand(self.cond)}, {self.if_true}, {self.if_false}"


@dataclass(frozen=True)
class Jmp:
    target: str
    opcode = "jmp"

    @property
    def targets(self) -> tuple[str, ...]:
        return (self.target,)

    def uses(self) -> Iterator[str]:
        return iter(())

    def __str__(self) -> str:
        return f"jmp {self.target}"


@dataclass(frozen=True)
class Ret:
    value: Operand
    opcode = "ret"

    @property
    def targets(self) -> tuple[str, ...]:
        return ()

    def uses(self) -> Iterator[str]:
        return iter([self.value] if isinstance(self.value, str) else [])

    def __str__(self) -> str:
        return f"ret {fmt_operand(self.value)}"


Terminator = Union[Br, Jmp, Ret]


@dataclass(frozen=True)
class BasicBlock:
    label: str
    phis: tuple[Phi, ...] = ()
    body: tuple[Instruction, ...] = ()
    terminator: Terminator = field(default_factory=lambda: Ret(0))

    @property
    def successors(self) -> tuple[str, ...]:
        return self.terminator.targets

    def __len__(self) -> int:
        return len(self.phis) + len(self.body) + 1


@dataclass(frozen=True)
class Function:
    name: str
    params: tuple[str, ...]
    blocks: tuple[BasicBlock, ...]

    @property
    def entry(self) -> BasicBlock:
        return self.blocks[0]

    def block(self, label: str) -> BasicBlock:
        for b in self.blocks:
            if b.label == label:
                return b
        raise KeyError(label)

    def block_map(self) -> dict[str, BasicBlock]:
        return {b.label: b for b in self.blocks}

    def with_blocks(self, blocks) -> Function:
        return replace(self, blocks=tuple(blocks))


@dataclass(frozen=True)
class Module:
    functions: tuple[Function, ...] = ()
    memories: tuple[MemoryDecl, ...] = ()

    def function(self, name: str) -> Function:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    def memory(self, name: str) -> MemoryDecl:
        for m in self.memories:
            if m.name == name:
                return m
        raise KeyError(name)

    def replace_function(self, fn: Function) -> Module:
        funcs = tuple(fn if f.name == fn.name else f for f in self.functions)
        return replace(self, functions=funcs)

    def __str__(self) -> str:
        from .text import print_module

        return print_module(self)
