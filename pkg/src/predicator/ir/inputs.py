"""Workload inputs: parameter values and memory initializers.

File format, one entry per line (``#`` comments allowed)::

    param x = -5
    mem a = [3, 1, 2]
    mem a = seed:42 uniform:[0,1000] len:256
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Union

from .nodes import Module, wrap64


@dataclass(frozen=True)
class RandomInit:
    seed: int
    lo: int
    hi: int
    length: int

    def cells(self) -> list[int]:
        rng = random.Random(self.seed)
        return [rng.randint(self.lo, self.hi) for _ in range(self.length)]

    def __str__(self) -> str:
        return f"seed:{self.seed} uniform:[{self.lo},{self.hi}] len:{self.length}"


MemInit = Union[tuple[int, ...], RandomInit]


@dataclass(frozen=True)
class Inputs:
    params: dict[str, int] = field(default_factory=dict)
    memories: dict[str, MemInit] = field(default_factory=dict)

    def __hash__(self):
        return hash((tuple(sorted(self.params.items())), tuple(sorted(self.memories.items()))))

    def memory_image(self, m: Module) -> dict[str, list[int]]:
        """Initial cell lists for every memory declared in ``m``."""
        image = {}
        for decl in m.memories:
            cells = [0] * decl.length
            init = self.memories.get(decl.name)
            if init is not None:
                vals = init.cells() if isinstance(init, RandomInit) else list(init)
                if len(vals) > decl.length:
                    raise InputsError(
                        f"initializer for @{decl.name} has {len(vals)} cells, "
                        f"memory holds {decl.length}")
                cells[:len(vals)] = [wrap64(v) for v in vals]
            image[decl.name] = cells
        for name in self.memories:
            if all(d.name != name for d in m.memories):
                raise InputsError(f"inputs initialize undeclared memory @{name}")
        return image

    def to_text(self) -> str:
        lines = [f"param {k} = {v}" for k, v in self.params.items()]
        for k, init in self.memories.items():
            rhs = str(init) if isinstance(init, RandomInit) else "[" + ",".join(map(str, init)) + "]"
            lines.append(f"mem {k} = {rhs}")
        return "\n".join(lines) + "\n"


class InputsError(ValueError):
    pass


_PARAM = re.compile(r"param\s+%?(\w+)\s*=\s*(-?\d+)$")
_MEM = re.compile(r"mem\s+@?(\w+)\s*=\s*(.+)$")
_RANDOM = re.compile(
    r"seed:(-?\d+)\s+uniform:\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\s+len:(\d+)$")


def parse_inputs(text: str) -> Inputs:
    params, mems = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _PARAM.match(line):
            params[m.group(1)] = int(m.group(2))
        elif m := _MEM.match(line):
            name, rhs = m.group(1), m.group(2).strip()
            if r := _RANDOM.match(rhs):
                seed, lo, hi, n = map(int, r.groups())
                if lo > hi:
                    raise InputsError(f"line {lineno}: empty range [{lo},{hi}]")
                mems[name] = RandomInit(seed, lo, hi, n)
            elif rhs.startswith("[") and rhs.endswith("]"):
                body = rhs[1:-1].strip()
                try:
                    mems[name] = tuple(int(x) for x in body.split(",")) if body else ()
                except ValueError:
                    raise InputsError(f"line {lineno}: bad cell list {rhs!r}") from None
            else:
                raise InputsError(f"line {lineno}: bad memory initializer {rhs!r}")
        else:
            raise InputsError(f"line {lineno}: expected 'param' or 'mem', got {line!r}")
    return Inputs(params, mems)
