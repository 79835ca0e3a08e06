"""Parser and printer for the textual IR.

Grammar (whitespace-insensitive, ``#`` starts a line comment)::

    module   := (mem | func)+
    mem      := 'mem' '@'NAME '[' INT ']'
    func     := 'func' '@'NAME '(' [ '%'NAME (',' '%'NAME)* ] ')' '{' block+ '}'
    block    := LABEL ':' phi* inst* term
    phi      := '%'NAME '=' 'phi' '[' LABEL ':' operand ']' (',' '[' ... ']')*
    inst     := '%'NAME '=' OPCODE operands
              | '%'NAME '=' 'load' '@'MEM ',' operand
              | 'store' '@'MEM ',' operand ',' operand
    term     := 'br' operand ',' LABEL ',' LABEL | 'jmp' LABEL | 'ret' operand
    operand  := '%'NAME | INT
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .nodes import (
    ARITY, OPCODES, BasicBlock, Br, Function, Instruction, Jmp, MemoryDecl,
    Module, Phi, Ret, wrap64,
)


class IRSyntaxError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


_TOKEN = re.compile(r"""
    (?P<comment>\#[^\n]*)
  | (?P<ws>\s+)
  | (?P<local>%[A-Za-z_][\w.]*)
  | (?P<global>@[A-Za-z_][\w.]*)
  | (?P<int>-?\d+)
  | (?P<ident>[A-Za-z_][\w.]*)
  | (?P<punct>[=,:\[\](){}])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise IRSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        for i, ch in enumerate(m.group()):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, message: str, tok: _Tok | None = None):
        tok = tok or self.tok
        raise IRSyntaxError(message, tok.line, tok.col)

    def advance(self) -> _Tok:
        t = self.tok
        self.i += 1
        return t

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            want = repr(text) if text is not None else kind
            got = repr(t.text) if t.kind != "eof" else "end of input"
            self.error(f"expected {want}, got {got}")
        return self.advance()

    def accept(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        if t.kind == kind and (text is None or t.text == text):
            self.i += 1
            return True
        return False

    def operand(self):
        t = self.tok
        if t.kind == "local":
            self.advance()
            return t.text[1:]
        if t.kind == "int":
            self.advance()
            v = int(t.text)
            if wrap64(v) != v:
                self.error(f"immediate {v} does not fit in 64 bits", t)
            return v
        self.error(f"expected operand, got {t.text!r}")

    # -- top level ---------------------------------------------------------

    def module(self) -> Module:
        funcs, mems = [], []
        fnames, mnames = set(), set()
        while True:
            t = self.tok
            if t.kind == "ident" and t.text == "mem":
                m = self.mem()
                if m.name in mnames:
                    self.error(f"duplicate memory '@{m.name}'", t)
                mnames.add(m.name)
                mems.append(m)
            elif t.kind == "ident" and t.text == "func":
                f = self.func()
                if f.name in fnames:
                    self.error(f"duplicate function '@{f.name}'", t)
                fnames.add(f.name)
                funcs.append(f)
            elif t.kind == "eof" and funcs:
                break
            else:
                self.error("expected 'func' or 'mem'")
        return Module(tuple(funcs), tuple(mems))

    def mem(self) -> MemoryDecl:
        self.expect("ident", "mem")
        name = self.expect("global").text[1:]
        self.expect("punct", "[")
        n = self.expect("int")
        if int(n.text) < 0:
            self.error("memory length must be non-negative", n)
        self.expect("punct", "]")
        return MemoryDecl(name, int(n.text))

    def func(self) -> Function:
        self.expect("ident", "func")
        name = self.expect("global").text[1:]
        self.expect("punct", "(")
        params = []
        if not self.accept("punct", ")"):
            while True:
                t = self.expect("local")
                if t.text[1:] in params:
                    self.error(f"duplicate parameter '{t.text}'", t)
                params.append(t.text[1:])
                if self.accept("punct", ")"):
                    break
                self.expect("punct", ",")
        self.expect("punct", "{")
        blocks, labels = [], set()
        while not self.accept("punct", "}"):
            t = self.tok
            b = self.block()
            if b.label in labels:
                self.error(f"duplicate label '{b.label}'", t)
            labels.add(b.label)
            blocks.append(b)
        if not blocks:
            self.error(f"function '@{name}' has no blocks")
        return Function(name, tuple(params), tuple(blocks))

    def block(self) -> BasicBlock:
        t = self.tok
        if t.kind != "ident":
            self.error(f"expected block label, got {t.text!r}")
        label = self.advance().text
        self.expect("punct", ":")
        phis, body = [], []
        while True:
            t = self.tok
            if t.kind == "ident" and t.text in ("br", "jmp", "ret"):
                term = self.terminator()
                return BasicBlock(label, tuple(phis), tuple(body), term)
            if t.kind == "ident" and t.text == "store":
                self.advance()
                mem = self.expect("global").text[1:]
                self.expect("punct", ",")
                idx = self.operand()
                self.expect("punct", ",")
                val = self.operand()
                body.append(Instruction(None, "store", (idx, val), mem))
                continue
            if t.kind == "local":
                result = self.advance().text[1:]
                self.expect("punct", "=")
                op = self.tok
                if op.kind != "ident":
                    self.error(f"expected opcode, got {op.text!r}")
                if op.text == "phi":
                    if body:
                        self.error("phi after non-phi instruction", op)
                    phis.append(self.phi(result))
                else:
                    body.append(self.instruction(result))
                continue
            if t.kind == "eof" or (t.kind == "punct" and t.text == "}") or (
                t.kind == "ident" and self.peek().text == ":"
            ):
                self.error(f"block '{label}' has no terminator")
            self.error(f"expected instruction, got {t.text!r}")

    def phi(self, result: str) -> Phi:
        self.expect("ident", "phi")
        incoming = []
        while True:
            self.expect("punct", "[")
            lab = self.expect("ident").text
            self.expect("punct", ":")
            incoming.append((lab, self.operand()))
            self.expect("punct", "]")
            if not self.accept("punct", ","):
                break
        return Phi(result, tuple(incoming))

    def instruction(self, result: str) -> Instruction:
        t = self.advance()
        opcode = t.text
        if opcode not in OPCODES:
            self.error(f"unknown opcode '{opcode}'", t)
        if opcode == "store":
            self.error("store does not produce a result", t)
        mem = None
        if opcode == "load":
            mem = self.expect("global").text[1:]
            self.expect("punct", ",")
        ops = [self.operand()]
        while self.accept("punct", ","):
            ops.append(self.operand())
        if len(ops) != ARITY[opcode]:
            self.error(f"'{opcode}' takes {ARITY[opcode]} operands, got {len(ops)}", t)
        return Instruction(result, opcode, tuple(ops), mem)

    def terminator(self):
        t = self.advance()
        if t.text == "br":
            cond = self.operand()
            self.expect("punct", ",")
            a = self.expect("ident").text
            self.expect("punct", ",")
            b = self.expect("ident").text
            return Br(cond, a, b)
        if t.text == "jmp":
            return Jmp(self.expect("ident").text)
        return Ret(self.operand())


def parse_module(text: str) -> Module:
    """Parse IR text into a :class:`Module`.

    Raises :class:`IRSyntaxError` carrying the 1-based line and column of
    the offending token.
    """
    return _Parser(text).module()


def print_module(m: Module) -> str:
    lines = [f"mem @{d.name}[{d.length}]" for d in m.memories]
    for f in m.functions:
        if lines:
            lines.append("")
        params = ", ".join(f"%{p}" for p in f.params)
        lines.append(f"func @{f.name}({params}) {{")
        for b in f.blocks:
            lines.append(f"{b.label}:")
            lines.extend(f"  {x}" for x in (*b.phis, *b.body, b.terminator))
        lines.append("}")
    return "\n".join(lines) + "\n"
