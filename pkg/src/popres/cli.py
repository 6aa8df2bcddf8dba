"""Command-line surface: monitor, boundaries and study subcommands.

Exit codes: 0 success, 2 validation error, 3 numerical/convergence error,
4 boundary-overlap configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import BoundaryOverlapError, ConvergenceError, ValidationError
from .reporting import (
    append_history,
    load_reference,
    load_snapshot,
    monitor,
    render_csv,
    render_text,
    run_study,
)
from .resemblance import ResemblanceConfig, decision_boundaries

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_OVERLAP = 4

_CONFIG_KEYS = {"c", "m", "alpha1", "alpha2", "delta_override", "seed"}


def load_config_file(path: str | Path) -> dict:
    """Flat key=value configuration file; '#' starts a comment."""
    values: dict[str, float] = {}
    for i, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{i}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        if key not in _CONFIG_KEYS:
            raise ValidationError(f"{path}:{i}: unknown configuration key {key!r}")
        try:
            values[key] = float(value.strip())
        except ValueError as exc:
            raise ValidationError(f"{path}:{i}: non-numeric value {value!r}") from exc
    return values


def _build_config(args: argparse.Namespace) -> tuple[ResemblanceConfig, int]:
    values: dict = {}
    if getattr(args, "config", None):
        values = load_config_file(args.config)
    # CLI flags override file values
    for flag, key in (("c", "c"), ("M", "m"), ("alpha1", "alpha1"),
                      ("alpha2", "alpha2"), ("delta", "delta_override")):
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = v
    seed = int(values.pop("seed", 0))
    if getattr(args, "seed", None) is not None:
        seed = args.seed
    cfg = ResemblanceConfig(
        c=values.get("c", 0.7),
        M=values.get("m", 2.0),
        alpha1=values.get("alpha1", 0.1),
        alpha2=values.get("alpha2", 0.05),
        delta_override=values.get("delta_override"),
    )
    return cfg, seed


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value configuration file")
    parser.add_argument("--c", type=float, help="tolerance scaling factor")
    parser.add_argument("--M", type=float, help="discrepancy multiplier (> 1)")
    parser.add_argument("--alpha1", type=float, help="reconstruction sensitivity")
    parser.add_argument("--alpha2", type=float, help="continued-use sensitivity")
    parser.add_argument("--delta", type=float, help="explicit tolerance override")
    parser.add_argument("--seed", type=int, help="random seed for Monte Carlo parts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="popres",
        description="Population resemblance monitoring for multinomial snapshots",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_mon = sub.add_parser("monitor", help="classify one snapshot against a reference")
    p_mon.add_argument("--snapshot", required=True)
    p_mon.add_argument("--reference", required=True)
    _add_config_flags(p_mon)
    p_mon.add_argument("--history", help="append the report to this JSON-lines file")
    p_mon.add_argument("--format", choices=("text", "json", "csv"), default="text")

    p_bnd = sub.add_parser("boundaries", help="print delta, lambda_sup, tau1, tau2")
    p_bnd.add_argument("--reference", required=True)
    p_bnd.add_argument("--n", type=int, required=True)
    _add_config_flags(p_bnd)
    p_bnd.add_argument("--format", choices=("text", "json"), default="text")

    p_st = sub.add_parser("study", help="run a simulation study and write CSV")
    p_st.add_argument("--study", required=True, choices=("table1", "stability", "sweep"))
    p_st.add_argument("--out", required=True)
    p_st.add_argument("--n", type=int)
    p_st.add_argument("--n-grid", help="comma-separated sample sizes")
    p_st.add_argument("--B", type=int, required=True)
    p_st.add_argument("--replications", type=int, default=100_000)
    p_st.add_argument("--grid-points", type=int, default=30)
    p_st.add_argument("--target-j", type=float, default=0.0)
    p_st.add_argument("--threshold", type=float, default=0.25)
    p_st.add_argument("--workers", type=int, default=1)
    _add_config_flags(p_st)
    return parser


def _cmd_monitor(args: argparse.Namespace) -> int:
    cfg, seed = _build_config(args)
    snapshot = load_snapshot(args.snapshot)
    reference = load_reference(args.reference)
    report = monitor(snapshot, reference, cfg, seed=seed)
    if args.history:
        ack = append_history(report, args.history)
        if ack.duplicate:
            print(f"note: duplicate report for {report.label!r}; history unchanged", file=sys.stderr)
    if args.format == "json":
        print(json.dumps(report.to_dict(), sort_keys=True, indent=2))
    elif args.format == "csv":
        sys.stdout.write(render_csv(report))
    else:
        print(render_text(report))
    return EXIT_OK


def _cmd_boundaries(args: argparse.Namespace) -> int:
    cfg, _ = _build_config(args)
    reference = load_reference(args.reference)
    bounds = decision_boundaries(reference, args.n, cfg)
    if args.format == "json":
        print(json.dumps({
            "n": bounds.n, "B": bounds.B, "delta": bounds.delta,
            "lambda_sup": bounds.lambda_sup, "tau1": bounds.tau1, "tau2": bounds.tau2,
        }, sort_keys=True, indent=2))
    else:
        print(f"(n={bounds.n}, B={bounds.B})  delta={bounds.delta:.6f}  "
              f"lambda_sup={bounds.lambda_sup:.4f}  tau1={bounds.tau1:.5f}  "
              f"tau2={bounds.tau2:.5f}")
    return EXIT_OK


def _cmd_study(args: argparse.Namespace) -> int:
    cfg, seed = _build_config(args)
    if args.n is None and not args.n_grid:
        raise ValidationError("study needs --n or --n-grid")
    params = {
        "B": args.B,
        "replications": args.replications,
        "seed": seed,
        "grid_points": args.grid_points,
        "target_j": args.target_j,
        "threshold": args.threshold,
        "workers": args.workers,
        "c": cfg.c, "M": cfg.M, "alpha1": cfg.alpha1, "alpha2": cfg.alpha2,
    }
    if args.n is not None:
        params["n"] = args.n
    if args.n_grid:
        params["n_grid"] = [int(v) for v in args.n_grid.split(",")]
    out = run_study(args.study, params, args.out)
    print(f"wrote {out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "monitor": _cmd_monitor,
        "boundaries": _cmd_boundaries,
        "study": _cmd_study,
    }
    try:
        return handlers[args.command](args)
    except BoundaryOverlapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OVERLAP
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
