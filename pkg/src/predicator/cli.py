"""Command-line front end.

Exit status is 0 on success, 1 for problems with the user's input (bad
flags, unreadable files, malformed IR, a bitmask of the wrong length) and
2 when an internal invariant breaks.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from pathlib import Path

from .features import extract_features, features_csv
from .ifconv import BitmaskLengthError, apply_bitmask, module_candidates, parse_bitmask
from .ir import (
    CfgError, IRSyntaxError, InputsError, InterpreterError, analyze_cfg, parse_inputs,
    parse_module, print_module, validate_module,
)
from .neat import NeatConfig, parse_neat_config
from .report import FORMATS, oracle_table, read_summary, write_bundle
from .sim import MachineModel, parse_machine, simulate
from .tuner import Program, TuneError, Workload, exhaustive_search, tune

SEED_ENV = "PREDICATOR_SEED"


class UserError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UserError(f"{self.prog}: {message}")


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UserError(f"cannot read {path}: {e.strerror or e}") from None


def _module(path: str):
    try:
        return parse_module(_read(path))
    except IRSyntaxError as e:
        raise UserError(f"{path}:{e}") from None


def _valid_module(path: str):
    m = _module(path)
    diags = validate_module(m)
    if diags:
        raise UserError(f"{path}: {diags[0]} (run 'check' for the full list)")
    return m


def _machine(path: str | None) -> MachineModel:
    if path is None:
        return MachineModel()
    try:
        return parse_machine(_read(path))
    except ValueError as e:
        raise UserError(f"{path}: {e}") from None


def _neat(path: str | None) -> NeatConfig:
    if path is None:
        return NeatConfig()
    try:
        return parse_neat_config(_read(path))
    except (ValueError, TypeError) as e:
        raise UserError(f"{path}: {e}") from None


def _workloads(paths: list[str]) -> list[Workload]:
    out, seen = [], set()
    for p in paths:
        try:
            inputs = parse_inputs(_read(p))
        except InputsError as e:
            raise UserError(f"{p}: {e}") from None
        name, k = Path(p).stem, 2
        while name in seen:
            name, k = f"{Path(p).stem}.{k}", k + 1
        seen.add(name)
        out.append(Workload(name, inputs))
    return out


def _entry(m, fn: str | None) -> str:
    if fn is None:
        return m.functions[0].name
    fn = fn.lstrip("@")
    if all(f.name != fn for f in m.functions):
        raise UserError(f"no function @{fn} in module")
    return fn


def _seed(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UserError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _program(args) -> Program:
    m = _valid_module(args.file)
    mm = _machine(args.machine)
    try:
        return Program.build(m, mm, _entry(m, args.fn))
    except TuneError as e:
        raise UserError(str(e)) from None


def cmd_check(args, out) -> int:
    m = _module(args.file)
    diags = validate_module(m)
    for d in diags:
        out.write(f"{d}\n")
    if not diags:
        out.write(f"{args.file}: ok\n")
    return 1 if diags else 0


def cmd_candidates(args, out) -> int:
    m = _valid_module(args.file)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["index", "branch_site", "function", "shape", "head", "true_side",
                "false_side", "join"])
    for c in module_candidates(m):
        w.writerow([c.index, c.site, c.function, c.shape, c.head, c.true_side or "",
                    c.false_side or "", c.join])
    return 0


def cmd_features(args, out) -> int:
    m = _valid_module(args.file)
    mm = _machine(args.machine)
    mems = {d.name: d.length for d in m.memories}
    cfgs = {f.name: analyze_cfg(f) for f in m.functions}
    fvs = [extract_features(m.function(c.function), c, mm, cfgs[c.function], mems)
           for c in module_candidates(m)]
    out.write(features_csv(fvs))
    return 0


def _converted(args):
    m = _valid_module(args.file)
    if args.bitmask is None:
        return m, None
    try:
        return apply_bitmask(m, parse_bitmask(args.bitmask))
    except BitmaskLengthError as e:
        raise UserError(f"{e}; '{args.file}' has {e.expected} candidate(s), "
                        f"see the 'candidates' subcommand") from None
    except ValueError as e:
        raise UserError(str(e)) from None


def cmd_convert(args, out) -> int:
    m, rep = _converted(args)
    out.write(print_module(m))
    text = rep.to_csv()
    if args.report:
        try:
            Path(args.report).write_text(text, encoding="utf-8")
        except OSError as e:
            raise UserError(f"cannot write {args.report}: {e.strerror or e}") from None
    else:
        sys.stderr.write(text)
    return 0


def cmd_simulate(args, out) -> int:
    m, _ = _converted(args)
    mm = _machine(args.machine)
    (w,) = _workloads([args.inputs])
    try:
        r = simulate(m, _entry(m, args.fn), w.inputs, mm)
    except (InterpreterError, InputsError) as e:
        raise UserError(f"{args.inputs}: {e}") from None
    out.write(r.to_csv())
    return 0


def cmd_tune(args, out) -> int:
    p = _program(args)
    ws = _workloads(args.inputs)
    ncfg = _neat(args.neat)
    mm = _machine(args.machine)
    try:
        r = tune(p, ws, ncfg, mm, _seed(args.seed))
    except (TuneError, InputsError) as e:
        raise UserError(str(e)) from None
    if args.out:
        write_bundle(r, args.out, args.format)
    out.write(f"best_speedup{FORMATS[args.format]}{r.best_fitness:.6f}\n")
    out.write(f"best_bitmask{FORMATS[args.format]}{r.best_bitmask}\n")
    return 0


def cmd_exhaustive(args, out) -> int:
    p = _program(args)
    ws = _workloads(args.inputs)
    mm = _machine(args.machine)
    try:
        r = exhaustive_search(p, ws, mm, limit=args.limit)
    except (TuneError, InputsError) as e:
        raise UserError(str(e)) from None
    if args.out:
        write_bundle(r, args.out, args.format)
    out.write(oracle_table(r, args.format))
    return 0


def cmd_report(args, out) -> int:
    try:
        rows = read_summary(args.bundle)
    except FileNotFoundError as e:
        raise UserError(str(e)) from None
    buf = io.StringIO()
    csv.writer(buf, delimiter=FORMATS[args.format], lineterminator="\n").writerows(rows)
    out.write(buf.getvalue())
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="predicator", description="If-conversion autotuning toolkit.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help, machine=False, fn_flag=False):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=fn)
        if name != "report":
            p.add_argument("file", help="IR module")
        if machine:
            p.add_argument("--machine", help="machine model file (default: built-in model)")
        if fn_flag:
            p.add_argument("--fn", help="entry function (default: first in module)")
        return p

    add("check", cmd_check, "validate a module")
    add("candidates", cmd_candidates, "list if-conversion candidates")
    add("features", cmd_features, "per-candidate feature CSV", machine=True)

    p = add("convert", cmd_convert, "apply a bitmask and print the converted IR")
    p.add_argument("--bitmask", required=True, help="one 0/1 per candidate, e.g. 1011")
    p.add_argument("--report", help="write the apply report CSV here instead of stderr")

    p = add("simulate", cmd_simulate, "run a workload and report cycles", machine=True,
            fn_flag=True)
    p.add_argument("--inputs", required=True, help="workload file")
    p.add_argument("--bitmask", help="convert with this bitmask first")

    for name, fn, help in (("tune", cmd_tune, "evolve a conversion policy"),
                           ("exhaustive", cmd_exhaustive, "try every bitmask")):
        p = add(name, fn, help, machine=True, fn_flag=True)
        p.add_argument("--inputs", required=True, nargs="+", help="workload file(s)")
        p.add_argument("--out", help="write the result bundle into this directory")
        p.add_argument("--format", choices=sorted(FORMATS), default="csv")
        if name == "tune":
            p.add_argument("--neat", help="NEAT configuration file")
            p.add_argument("--seed", type=int,
                           help=f"RNG seed (default: ${SEED_ENV}, else 0)")
        else:
            p.add_argument("--limit", type=int, default=20, help="maximum candidate count")

    p = add("report", cmd_report, "print a result bundle's summary")
    p.add_argument("bundle", help="directory written by tune/exhaustive --out")
    p.add_argument("--format", choices=sorted(FORMATS), default="csv")
    return ap


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args, out)
    except (UserError, CfgError, OSError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 1
    except Exception as e:  # invariant violations surface here
        sys.stderr.write(f"internal error: {type(e).__name__}: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
