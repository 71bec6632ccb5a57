"""Command-line entry point: ``vbca <subcommand> [options]``.

Settings are layered: built-in defaults, then a JSON ``--config`` file, then
explicit command-line flags.

Exit codes: 0 success, 1 invalid configuration, 2 connectivity loss and
3 non-convergence (the last two for ``run`` only; sweeps record failures in
their tables and exit 0).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .errors import ParameterError

EXIT_OK, EXIT_CONFIG, EXIT_CONNECTIVITY, EXIT_NOT_CONVERGED = 0, 1, 2, 3


def _common(p: argparse.ArgumentParser, multi: bool) -> None:
    nargs = "+" if multi else None
    p.add_argument("--config", help="JSON file of flat config keys")
    p.add_argument("--k", type=int, nargs=nargs, help="peripheral drone count(s)")
    p.add_argument("--cp", type=float, nargs=nargs, help="compactness parameter value(s)")
    p.add_argument("--seed", type=int, help="initialization seed (base seed for sweeps)")
    p.add_argument("--out", default="vbca-out", help="output directory (default: %(default)s)")
    p.add_argument("--max-steps", type=int, help="iteration cap per run")
    p.add_argument("--no-plots", action="store_true", help="skip PNG figures")


def _coverage_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", type=int, help="Monte Carlo samples per coverage estimate")
    p.add_argument("--exclude-central-coverage", action="store_true", default=None,
                   help="leave the central drone's sphere out of coverage")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vbca", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one scenario: trajectory.csv, report.json")
    _common(p, multi=False)
    _coverage_flags(p)

    for name, help_ in (("sweep-distance", "average central distance over the cp x k grid"),
                        ("sweep-coverage", "union coverage over the cp x k grid"),
                        ("baseline", "coverage against exact placement")):
        p = sub.add_parser(name, help=help_)
        _common(p, multi=True)
        if name != "sweep-distance":
            _coverage_flags(p)
        else:
            p.add_argument("--replicates", type=int, default=1, help="seeds per cell")
        p.add_argument("--workers", type=int, default=1, help="parallel processes")

    p = sub.add_parser("stability", help="per-step distance variation for one run")
    _common(p, multi=False)
    p.add_argument("--horizon", type=int, help="fixed number of steps instead of stopping at steady state")

    p = sub.add_parser("geometries", help="write the reference geometry table")
    p.add_argument("--out", default="vbca-out")
    return parser


def _settings(args) -> dict:
    """Merge defaults <- config file <- flags into a flat mapping."""
    data = harness.load_config(args.config) if getattr(args, "config", None) else {}
    harness.ScenarioConfig.from_mapping(
        {k: v for k, v in data.items() if k not in ("k_peripheral", "cp")}
    )  # rejects unknown keys early
    flags = {
        "k_peripheral": getattr(args, "k", None),
        "cp": getattr(args, "cp", None),
        "seed": getattr(args, "seed", None),
        "max_steps": getattr(args, "max_steps", None),
        "coverage_samples": getattr(args, "samples", None),
    }
    if getattr(args, "exclude_central_coverage", None):
        flags["include_central_coverage"] = False
    data.update({k: v for k, v in flags.items() if v is not None})
    return data


def _overrides(data: dict) -> dict:
    skip = {"k_peripheral", "cp", "output_dir", "coverage_samples", "coverage_seed",
            "include_central_coverage", "seed"}
    return {k: v for k, v in data.items() if k not in skip}


def _as_list(value, default):
    if value is None:
        return list(default)
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _emit(table: harness.Table, out: Path, plot, plots: bool) -> None:
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{table.name}.csv"
    table.write(csv_path)
    print(f"wrote {csv_path}")
    if plots:
        print(f"wrote {plot(table, out / f'{table.name}.png')}")
    sys.stdout.write(table.to_csv())


def _cmd_run(args, data: dict) -> int:
    data["output_dir"] = args.out
    config = harness.ScenarioConfig.from_mapping(data)
    report = harness.run(config)
    if not args.no_plots and report.metrics:
        from .plotting import plot_run
        plot_run(report, Path(args.out) / "run.png")
    for key, value in report.to_dict()["display"].items():
        print(f"{key}: {value}")
    if report.error is not None:
        print(f"error: {report.error['message']}", file=sys.stderr)
        return EXIT_CONNECTIVITY
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def _check(data: dict) -> None:
    # Validate shared settings against a representative scenario.
    probe = {k: v for k, v in data.items() if k not in ("k_peripheral", "cp")}
    errors = harness.validate_config(harness.ScenarioConfig.from_mapping(probe))
    for k in _as_list(data.get("k_peripheral"), []):
        if k < 1:
            errors.append("k must be >= 1")
    for cp in _as_list(data.get("cp"), []):
        if not cp > 0:
            errors.append("cp must be > 0")
    if errors:
        raise ParameterError("; ".join(errors))


def _cmd_sweep(args, data: dict) -> int:
    from . import plotting

    _check(data)
    out = Path(args.out)
    plots = not args.no_plots
    common = dict(base_seed=data.get("seed", 0), overrides=_overrides(data), workers=args.workers)
    if args.command == "sweep-distance":
        table = harness.sweep_cp_vs_distance(
            _as_list(data.get("cp"), harness.CP_GRID), _as_list(data.get("k_peripheral"), harness.K_GRID),
            replicates=args.replicates, **common)
        _emit(table, out, plotting.plot_cp_vs_distance, plots)
        return EXIT_OK
    cov = dict(samples=data.get("coverage_samples", 250_000),
               coverage_seed=data.get("coverage_seed", 0),
               include_central=data.get("include_central_coverage", True))
    if args.command == "sweep-coverage":
        table = harness.sweep_coverage_vs_k(
            _as_list(data.get("cp"), harness.CP_GRID), _as_list(data.get("k_peripheral"), harness.K_GRID),
            **cov, **common)
        _emit(table, out, plotting.plot_coverage_vs_k, plots)
    else:
        table = harness.baseline_comparison(
            _as_list(data.get("cp"), harness.BASELINE_CP),
            _as_list(data.get("k_peripheral"), harness.BASELINE_K), **cov, **common)
        _emit(table, out, plotting.plot_baseline, plots)
    return EXIT_OK


def _cmd_stability(args, data: dict) -> int:
    from .plotting import plot_stability

    _check(data)
    table = harness.stability_trace(
        data.get("k_peripheral", 7), data.get("cp", 40.0), data.get("seed", 0),
        args.horizon, _overrides(data))
    _emit(table, Path(args.out), plot_stability, not args.no_plots)
    return EXIT_OK


def _cmd_geometries(args) -> int:
    from .geometry import reference_table

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "reference_geometries.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(reference_table())
    print(f"wrote {path}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "geometries":
        return _cmd_geometries(args)
    try:
        data = _settings(args)
        if args.command == "run":
            return _cmd_run(args, data)
        if args.command == "stability":
            return _cmd_stability(args, data)
        return _cmd_sweep(args, data)
    except (ParameterError, OSError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
