"""Bundled benchmark kernels.

Each kernel ships as ``<name>.ir`` with a reference workload ``<name>.in``;
the entry function carries the kernel's name.  :func:`random_inputs` draws
extra workloads for property checks, occasionally pushing loop bounds past
the end of memory so trap behavior gets exercised too.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cache
from importlib import resources
from typing import Callable

from ..ir import Inputs, Module, parse_inputs, parse_module
from ..sim import MachineModel, parse_machine

NAMES = ("abs", "clampsum", "maxreduce", "sortcmp", "nested", "statemach")


def _cells(rng: random.Random, n: int, lo: int, hi: int) -> tuple[int, ...]:
    return tuple(rng.randint(lo, hi) for _ in range(n))


def _abs(rng):
    x = rng.choice([rng.randint(-1000, 1000), -(2**63), 2**63 - 1, 0])
    return Inputs({"x": x})


def _clampsum(rng):
    n = rng.randint(0, 40) if rng.random() < 0.9 else rng.randint(255, 270)
    lo = rng.randint(-100, 600)
    return Inputs({"n": n, "lo": lo, "hi": lo + rng.randint(-50, 500)},
                  {"a": _cells(rng, 256, -1000, 1000)})


def _maxreduce(rng):
    n = rng.randint(0, 40) if rng.random() < 0.9 else rng.randint(255, 270)
    return Inputs({"n": n, "bonus": rng.randint(-5, 5), "decay": rng.randint(-3, 3)},
                  {"a": _cells(rng, 256, -1000, 1000)})


def _sortcmp(rng):
    n = rng.randint(0, 16) if rng.random() < 0.9 else rng.randint(63, 66)
    return Inputs({"n": n}, {"a": _cells(rng, 64, -3_000_000_000, 3_000_000_000)})


def _nested(rng):
    n = rng.randint(0, 40) if rng.random() < 0.9 else rng.randint(255, 270)
    return Inputs({"n": n, "t": rng.randint(-100, 1100)}, {"a": _cells(rng, 256, 0, 1000)})


def _statemach(rng):
    n = rng.randint(0, 40) if rng.random() < 0.9 else rng.randint(255, 270)
    return Inputs({"n": n}, {"a": _cells(rng, 256, 0, 1000)})


_GENERATORS: dict[str, Callable[[random.Random], Inputs]] = {
    "abs": _abs, "clampsum": _clampsum, "maxreduce": _maxreduce,
    "sortcmp": _sortcmp, "nested": _nested, "statemach": _statemach,
}


@dataclass(frozen=True)
class Kernel:
    name: str
    source: str
    inputs_text: str

    @property
    def module(self) -> Module:
        return parse_module(self.source)

    @property
    def inputs(self) -> Inputs:
        return parse_inputs(self.inputs_text)

    def random_inputs(self, rng: random.Random) -> Inputs:
        return _GENERATORS[self.name](rng)


def _read(name: str) -> str:
    return resources.files(__name__).joinpath(name).read_text()


@cache
def load(name: str) -> Kernel:
    if name not in NAMES:
        raise KeyError(f"unknown kernel {name!r}; choose from {', '.join(NAMES)}")
    return Kernel(name, _read(f"{name}.ir"), _read(f"{name}.in"))


def all_kernels() -> list[Kernel]:
    return [load(n) for n in NAMES]


def path(filename: str):
    """Filesystem path of a bundled file (for passing to the CLI)."""
    return resources.files(__name__).joinpath(filename)


def default_machine() -> MachineModel:
    return parse_machine(_read("default.cfg"))
