"""Command-line front end: symmetries / reduce / verify.

Exit codes: 0 success, 2 parse error, 3 pipeline hard error, 4 verification
deviation above threshold.  JSON output carries a top-level schema field and
is byte-identical across runs with identical configuration on the exact tier.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from dataclasses import dataclass, field

from ._scalar import Scalar
from .detsys import build_determining_system
from .liealg import build_bracket_table, generator_preference
from .linsolve import (
    SymredWarning,
    filter_spurious,
    lll_reduce,
    solve_kernel,
    solve_kernel_float,
)
from .reducer import reduce_loop
from .sysio import ParseError, SymredError, parse_system, print_system
from .verify import check_reduction

DEVIATION_THRESHOLD = 1e-6
VERIFY_TRIALS = 3
VERIFY_T_END = 2.0
VERIFY_H = 1e-3


@dataclass
class RunConfig:
    input_path: str
    mode: str  # symmetries | reduce | verify
    j_mode: str = "full"  # full | fixed-points | nullcline
    nullcline_vars: list = field(default_factory=list)
    seed: int = 0
    max_steps: int = 10
    tier: str = "exact"  # exact | float
    output: str = "text"  # text | json


def default_seed() -> int:
    env = os.environ.get("SYMRED_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SymredError(f"SYMRED_SEED must be an integer, got {env!r}") from None
    return 0


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symred",
        description=(
            "Compute affine expanded Lie point symmetries of parametric "
            "ODE/algebraic systems and reduce their parameter count by "
            "invariantization."
        ),
    )
    sub = parser.add_subparsers(dest="mode", required=True)

    def common(p):
        p.add_argument("input", help="path to a system file in the symred DSL")
        p.add_argument(
            "--seed",
            type=int,
            default=None,
            help="specialization seed (default: SYMRED_SEED env var, else 0)",
        )
        p.add_argument(
            "--fixed-points",
            action="store_true",
            help="treat every ode as an algebraic equation (J empty)",
        )
        p.add_argument(
            "--nullcline",
            metavar="VARS",
            default=None,
            help="comma-separated state variables kept differential (the rest become equations)",
        )
        p.add_argument(
            "--tier",
            choices=("exact", "float"),
            default="exact",
            help="arithmetic tier (exact Q(i) or complex doubles)",
        )
        p.add_argument("--json", action="store_true", help="emit a JSON report")

    p_sym = sub.add_parser("symmetries", help="print the flagged, LLL-reduced symmetry basis")
    common(p_sym)
    p_red = sub.add_parser("reduce", help="run the reduction loop and print the steps")
    common(p_red)
    p_red.add_argument("--max-steps", type=int, default=10, help="stop after this many reductions")
    p_ver = sub.add_parser("verify", help="reduce, then cross-check trajectories numerically")
    common(p_ver)
    p_ver.add_argument("--max-steps", type=int, default=10, help="stop after this many reductions")
    return parser


def config_from_args(args) -> RunConfig:
    j_mode = "full"
    nullcline = []
    if args.fixed_points:
        j_mode = "fixed-points"
    if args.nullcline is not None:
        if args.fixed_points:
            raise SymredError("--fixed-points and --nullcline are mutually exclusive")
        j_mode = "nullcline"
        nullcline = [v.strip() for v in args.nullcline.replace(",", " ").split() if v.strip()]
        if not nullcline:
            raise SymredError("--nullcline needs at least one variable name")
    return RunConfig(
        input_path=args.input,
        mode=args.mode,
        j_mode=j_mode,
        nullcline_vars=nullcline,
        seed=args.seed if args.seed is not None else default_seed(),
        max_steps=getattr(args, "max_steps", 10),
        tier=args.tier,
        output="json" if args.json else "text",
    )


def _apply_j_selector(spec, cfg: RunConfig):
    if cfg.j_mode == "full":
        return spec
    if cfg.j_mode == "fixed-points":
        return spec.with_active(())
    indices = []
    for nm in cfg.nullcline_vars:
        j = spec.var_index(nm)  # KeyError -> config error upstream
        if spec.roles[j] != "state":
            raise SymredError(f"nullcline selector {nm!r} is not a state variable")
        indices.append(j)
    return spec.with_active(indices)


def _generator_json(g, names) -> dict:
    return {
        "action": g.derivation.describe(names),
        "lambda": str(g.lam),
        "verified": g.verified,
        "reduction_usable": bool(g.reduction_usable),
    }


def _symmetries_report(spec, cfg: RunConfig):
    ds = build_determining_system(spec)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SymredWarning)
        if cfg.tier == "float":
            basis, trace = solve_kernel_float(ds, cfg.seed)
        else:
            basis, trace = solve_kernel(ds, cfg.seed)
            basis = lll_reduce(basis)
        basis = filter_spurious(basis, spec)
        table = build_bracket_table(basis)
    brackets = []
    n = len(basis.generators)
    for i in range(n):
        for j in range(i + 1, n):
            coeffs = table.coefficients[(i, j)]
            brackets.append(
                {
                    "pair": [i, j],
                    "coefficients": None if coeffs is None else [str(c) for c in coeffs],
                }
            )
    return {
        "dimension": n,
        "specialization_ranks": trace.ranks,
        "generators": [_generator_json(g, spec.names) for g in basis.generators],
        "brackets": brackets,
        "warnings": [str(w.message) for w in caught],
    }, basis


def run(cfg: RunConfig):
    """Execute one CLI run; returns (exit_code, report dict)."""
    report = {
        "schema": 1,
        "mode": cfg.mode,
        "input": cfg.input_path,
        "seed": cfg.seed,
        "tier": cfg.tier,
        "errors": [],
    }
    try:
        with open(cfg.input_path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        report["errors"].append({"type": "io", "message": str(exc)})
        return 2, report
    try:
        spec = parse_system(text)
        spec = _apply_j_selector(spec, cfg)
    except (ParseError, KeyError, ValueError, SymredError) as exc:
        report["errors"].append({"type": "parse", "message": str(exc)})
        return 2, report

    report["system"] = {
        "text": print_system(spec),
        "variables": list(spec.names),
        "odes": sorted(spec.names[j] for j in spec.active),
    }
    try:
        if cfg.mode == "symmetries":
            sym, _basis = _symmetries_report(spec, cfg)
            report["symmetries"] = sym
            return 0, report
        reduced = reduce_loop(spec, cfg.seed, cfg.max_steps)
        rj = reduced.to_json_dict()
        report["steps"] = rj["steps"]
        report["final"] = rj["final"]
        report["parameterization"] = rj["parameterization"]
        report["warnings"] = rj["warnings"] + rj["notes"]
        if cfg.mode == "reduce":
            return 0, report
        ver = check_reduction(reduced, VERIFY_TRIALS, cfg.seed, VERIFY_T_END, VERIFY_H)
        report["verification"] = {
            "trials": ver["trials"],
            "resamples": ver["resamples"],
            "max_deviation": ver["max_deviation"],
            "threshold": DEVIATION_THRESHOLD,
            "checks": [
                {
                    "params": {k: str(v) for k, v in c.params.items()},
                    "init": {k: str(v) for k, v in c.init.items()},
                    "t_end": c.t_end,
                    "h": c.h,
                    "deviation": c.deviation,
                }
                for c in ver["checks"]
            ],
        }
        if ver["max_deviation"] > DEVIATION_THRESHOLD:
            report["errors"].append(
                {
                    "type": "verification",
                    "message": (
                        f"max relative deviation {ver['max_deviation']:.3e} exceeds "
                        f"{DEVIATION_THRESHOLD:.1e}"
                    ),
                }
            )
            return 4, report
        return 0, report
    except SymredError as exc:
        report["errors"].append({"type": "pipeline", "message": str(exc)})
        return 3, report


def _print_text(report: dict, out):
    def emit(line=""):
        print(line, file=out)

    emit(f"symred {report['mode']}  input={report['input']}  seed={report['seed']}  tier={report['tier']}")
    if report.get("system"):
        emit()
        emit("system:")
        for line in report["system"]["text"].rstrip().splitlines():
            emit(f"  {line}")
    if "symmetries" in report:
        sym = report["symmetries"]
        emit()
        emit(f"symmetry basis (dimension {sym['dimension']}):")
        for k, g in enumerate(sym["generators"]):
            flags = "usable" if g["reduction_usable"] else "spurious"
            action = ", ".join(f"{v} -> {e}" for v, e in g["action"].items())
            emit(f"  [{k}] lambda={g['lambda']}  {flags}  {action}")
        closed = all(b["coefficients"] is not None for b in sym["brackets"])
        emit(f"  bracket table closed in basis: {'yes' if closed else 'no'}")
        for w in sym["warnings"]:
            emit(f"  warning: {w}")
    if "steps" in report:
        emit()
        emit(f"reduction steps: {len(report['steps'])}")
        for s in report["steps"]:
            emit(f"  step {s['index']}: pivot {s['pivot']}  ({s['principal']['kind']} principal element)")
            action = ", ".join(f"{v} -> {e}" for v, e in s["generator"]["action"].items())
            emit(f"    generator: {action}  lambda={s['generator']['lambda']}")
            emit(f"    hyperplane: {s['principal']['hyperplane']} = 0")
            emit(f"    relation: {s['relation']}")
            for v, e in s["parameterization"].items():
                emit(f"    {v} = {e}")
        emit()
        emit("final system:")
        for line in report["final"]["text"].rstrip().splitlines():
            emit(f"  {line}")
        for w in report.get("warnings", []):
            emit(f"  warning: {w}")
    if "verification" in report:
        ver = report["verification"]
        emit()
        emit(
            f"verification: {ver['trials']} trials, max relative deviation "
            f"{ver['max_deviation']:.3e} (threshold {ver['threshold']:.1e})"
        )
    for e in report.get("errors", []):
        emit(f"error[{e['type']}]: {e['message']}")


def main(argv=None) -> int:
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
        cfg = config_from_args(args)
    except SymredError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    code, report = run(cfg)
    if cfg.output == "json":
        print(json.dumps(report, indent=2))
    else:
        _print_text(report, sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
