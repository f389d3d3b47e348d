"""Command-line interface: ``tagcalc normalize|derive|check|wigner``.

Settings come from an INI file (``--config`` or ``$TAGCALC_CONFIG``)::

    [grid]
    n = 512
    L = 20

    [normalize]
    mode = distributional
    step_budget = 100000

    [output]
    format = text

    [check]
    seed = 0

Command-line flags override the file.  Exit codes: 0 ok, 1 user error,
2 divergence or failed threshold.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

from . import numeric as nm
from .errors import DivergenceError, TagcalcError

EXIT_OK, EXIT_USER, EXIT_FAIL = 0, 1, 2


class ConfigError(Exception):
    pass


@dataclass
class Config:
    n: int = 512
    L: float = 20.0
    mode: str = "distributional"
    step_budget: int = 100_000
    format: str = "text"
    seed: int = 0

    def validate(self):
        if self.n < 2 or self.n & (self.n - 1):
            raise ConfigError(f"grid.n = {self.n} is not a power of two")
        if not self.L > 0:
            raise ConfigError("grid.L must be positive")
        if self.mode not in ("distributional", "paperFaithful"):
            raise ConfigError(f"normalize.mode must be distributional or paperFaithful, not {self.mode!r}")
        if self.step_budget <= 0:
            raise ConfigError("normalize.step_budget must be positive")
        if self.format not in ("text", "json", "csv"):
            raise ConfigError(f"output.format must be text, json or csv, not {self.format!r}")
        return self


def load_config(path: str | None, args: argparse.Namespace) -> Config:
    cfg = Config()
    path = path or os.environ.get("TAGCALC_CONFIG")
    if path:
        cp = configparser.ConfigParser()
        if not cp.read(path):
            raise ConfigError(f"cannot read config file {path!r}")
        try:
            cfg.n = cp.getint("grid", "n", fallback=cfg.n)
            cfg.L = cp.getfloat("grid", "L", fallback=cfg.L)
            cfg.mode = cp.get("normalize", "mode", fallback=cfg.mode)
            cfg.step_budget = cp.getint("normalize", "step_budget", fallback=cfg.step_budget)
            cfg.format = cp.get("output", "format", fallback=cfg.format)
            cfg.seed = cp.getint("check", "seed", fallback=cfg.seed)
        except ValueError as e:
            raise ConfigError(f"{path}: {e}") from None
    for key in ("n", "L", "mode", "step_budget", "format", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    return cfg.validate()


def _emit(obj, text: str, cfg: Config, out):
    if cfg.format == "json":
        out.write(json.dumps(obj, indent=2) + "\n")
    else:
        out.write(text.rstrip("\n") + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_normalize(args, cfg: Config, out) -> int:
    from .dsl import parse, print_expr
    from .expr import expr_to_json
    from .rewrite import normalize

    src = sys.stdin.read() if args.expr == "-" else args.expr
    e = parse(src)
    try:
        nf, report = normalize(e, cfg.mode, budget=cfg.step_budget)
    except DivergenceError as err:
        rep = err.report.to_json() if err.report else {}
        _emit({"error": str(err), "report": rep}, f"divergence: {err}", cfg, out)
        return EXIT_FAIL
    text = print_expr(nf)
    lines = [text]
    if report.flags:
        lines.append("flags: " + ", ".join(report.flags))
    if args.trace_steps:
        for rule, before, after, hits in report.steps:
            lines.append(f"  {rule:10} {before} -> {after}  ({hits} term{'s' if hits != 1 else ''})")
    obj = {"input": src, "result": text, "expr": expr_to_json(nf), "fixpoint": report.fixpoint,
           "flags": report.flags}
    if args.trace_steps:
        obj["report"] = report.to_json()
    _emit(obj, "\n".join(lines), cfg, out)
    return EXIT_OK


def cmd_derive(args, cfg: Config, out) -> int:
    from .coeff import I
    from .derivations import DERIVATIONS, identity_coefficient, run_derivation
    from .dsl import print_expr

    if args.name not in DERIVATIONS:
        sys.stderr.write(f"unknown derivation {args.name!r}; available: {', '.join(DERIVATIONS)}\n")
        return EXIT_USER
    params = {}
    if args.name == "symplectic":
        for k in "abcd":
            given = getattr(args, k)
            if given is not None:
                try:
                    params[k] = Fraction(given)
                except ValueError:
                    raise ConfigError(f"--{k} must be an exact rational, got {given!r}") from None
    d = run_derivation(args.name, cfg.mode, **params)
    verdict = "PASS" if d.ok else "FAIL"
    lines = [f"{d.name} [{cfg.mode}] {verdict}",
             f"  result:   {print_expr(d.result)}",
             f"  expected: {print_expr(d.expected)}"]
    for label, (r, e) in d.parts.items():
        lines.append(f"  {label}: {print_expr(r)}  (expected {print_expr(e)})")
    obj = d.to_json()
    if args.name == "symplectic":
        symp = identity_coefficient(d.result) == I
        lines.append(f"  symplectic: {'yes' if symp else 'no'}")
        obj["symplectic"] = symp
    if args.trace_steps:
        for rule, before, after, hits in d.log.steps:
            lines.append(f"    {rule:10} {before} -> {after}")
    _emit(obj, "\n".join(lines), cfg, out)
    return EXIT_OK if d.ok else EXIT_FAIL


def cmd_check(args, cfg: Config, out) -> int:
    from .checks import run_checks

    grid = nm.Grid(cfg.n, cfg.L)
    checks = run_checks(grid, cfg.seed)
    ok = all(c.passed for c in checks)
    lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name:34} {c.value:.3e}  (threshold {c.threshold:.0e})"
             for c in checks]
    lines.append(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    obj = {"grid": grid.to_json(), "seed": cfg.seed, "pass": ok, "checks": [c.to_json() for c in checks]}
    _emit(obj, "\n".join(lines), cfg, out)
    return EXIT_OK if ok else EXIT_FAIL


def parse_state(spec: str, grid: nm.Grid) -> nm.NumericState:
    kind, _, arg = spec.partition(":")
    if kind == "fock":
        try:
            n = int(arg)
        except ValueError:
            raise ConfigError(f"bad Fock index in {spec!r}") from None
        return nm.hermite_gauss(grid, n)
    if kind == "coherent":
        try:
            re_, im_ = (float(x) for x in arg.split(","))
        except ValueError:
            raise ConfigError(f"coherent state needs 're,im', got {arg!r}") from None
        return nm.coherent(grid, complex(re_, im_))
    raise ConfigError(f"unknown state spec {spec!r}; use fock:n or coherent:re,im")


def cmd_wigner(args, cfg: Config, out) -> int:
    grid = nm.Grid(cfg.n, cfg.L)
    try:
        psi = parse_state(args.state, grid)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    W = nm.wigner(psi)
    W = nm.WignerMap(W.grid, W.values, {"state": args.state})
    fmt = "csv" if cfg.format == "csv" else "json"
    data = W.dumps(fmt)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(data)
        out.write(f"wrote {args.out} ({fmt}, mass {W.mass().real:.12f})\n")
    else:
        out.write(data if data.endswith("\n") else data + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file (default: $TAGCALC_CONFIG)")
    common.add_argument("--format", choices=["text", "json", "csv"], default=None)
    common.add_argument("--mode", choices=["distributional", "paperFaithful"], default=None)

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--n", type=int, default=None, help="grid samples (power of two)")
    grid.add_argument("--L", type=float, default=None, help="grid extent")

    p = argparse.ArgumentParser(prog="tagcalc", description="Symbolic and numeric Dirac-notation calculus.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("normalize", parents=[common], help="normalize a DSL expression")
    s.add_argument("expr", help="expression text, or - for stdin")
    s.add_argument("--trace-steps", action="store_true")
    s.add_argument("--step-budget", dest="step_budget", type=int, default=None)
    s.set_defaults(func=cmd_normalize)

    s = sub.add_parser("derive", parents=[common], help="run a canned derivation")
    s.add_argument("name")
    s.add_argument("--trace-steps", action="store_true")
    for k in "abcd":
        s.add_argument(f"--{k}", default=None, help=f"symplectic parameter {k} (exact rational)")
    s.set_defaults(func=cmd_derive)

    s = sub.add_parser("check", parents=[common, grid], help="run the numeric oracle suite")
    s.add_argument("--seed", type=int, default=None)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("wigner", parents=[common, grid], help="Wigner map of a state")
    s.add_argument("state", help="fock:n or coherent:re,im")
    s.add_argument("--out", help="output file (default stdout)")
    s.set_defaults(func=cmd_wigner)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USER if e.code else EXIT_OK
    try:
        cfg = load_config(args.config, args)
        return args.func(args, cfg, out)
    except (ConfigError, TagcalcError, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USER


if __name__ == "__main__":
    sys.exit(main())
