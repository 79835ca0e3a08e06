"""Minimal SSA-style IR: types, text format, validation, CFG analyses and a
reference interpreter."""

from .cfg import CfgError, CfgInfo, analyze_cfg
from .inputs import Inputs, InputsError, RandomInit, parse_inputs
from .interp import (
    DEFAULT_STEP_BUDGET, ExecResult, InterpreterError, InterpreterTrap,
    NonTermination, TraceEntry, branch_sites, interpret,
)
from .nodes import (
    BasicBlock, Br, Function, Instruction, Jmp, MemoryDecl, Module, Phi, Ret,
    wrap64,
)
from .text import IRSyntaxError, parse_module, print_module
from .validate import Diagnostic, validate_module

__all__ = [
    "BasicBlock", "Br", "CfgError", "CfgInfo", "DEFAULT_STEP_BUDGET", "Diagnostic",
    "ExecResult", "Function", "IRSyntaxError", "Inputs", "InputsError", "Instruction",
    "InterpreterError", "InterpreterTrap", "Jmp", "MemoryDecl", "Module",
    "NonTermination", "Phi", "RandomInit", "Ret", "TraceEntry", "analyze_cfg",
    "branch_sites", "interpret", "parse_inputs", "parse_module", "print_module",
    "validate_module", "wrap64",
]
