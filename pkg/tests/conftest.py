import sys

import pytest

from predicator.ir import InterpreterTrap, interpret, parse_module

ABS = """\
mem @a[256]
func @abs(%x) {
entry:
  %c = icmp.slt %x, 0
  br %c, then, join        # branch site b0
then:
  %t = sub 0, %x
  jmp join
join:
  %r = phi [then: %t], [entry: %x]
  ret %r
}
"""

MAX = """\
func @max(%a, %b) {
entry:
  %c = icmp.sgt %a, %b
  br %c, left, right
left:
  %x = add %a, 0
  jmp join
right:
  %y = add %b, 0
  jmp join
join:
  %m = phi [left: %x], [right: %y]
  ret %m
}
"""

STRAIGHT = """\
func @line(%a) {
entry:
  %b = add %a, 1
  ret %b
}
"""


def outcome(m, fn, inputs):
    """Observable behavior: return value and memory, or the trap."""
    try:
        r = interpret(m, fn, inputs)
    except InterpreterTrap as e:
        return ("trap", e.kind, e.detail)
    return ("ok", r.value, r.memory, tuple(r.stores()))


@pytest.fixture
def abs_module():
    return parse_module(ABS)


@pytest.fixture
def max_module():
    return parse_module(MAX)


def pytest_terminal_summary(terminalreporter):
    acc = sys.modules.get("test_acceptance")
    results = getattr(acc, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(
            f"[{'PASS' if ok else 'FAIL'}] criterion {n} ({acc.TITLES[n]}): {detail}")
