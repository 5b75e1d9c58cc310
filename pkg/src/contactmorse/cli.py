"""Command-line driver: one batch run per invocation.

Exit status taxonomy (part of the public contract, scripts depend on it):
  0  success: detection ran, bounds asserted and met
  1  error: bad config, calibration failure, or a numerical failure
  2  bounds not asserted: degenerate records or a suspected continuum
  3  route disagreement: the genfun and direct record sets differ
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .flow import IntegratorSettings, calibrate_steps_per_unit, integrate_flow
from .hamiltonian import ContactHamiltonianSpec
from .linsymp import mul_i
from .report import RunReport, write_outputs
from .translated import RouteDisagreementError, sweep_and_count

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BOUNDS_NOT_ASSERTED = 2
EXIT_ROUTE_DISAGREEMENT = 3


def _calibration_check(n: int, settings: IntegratorSettings) -> float:
    """Integrate h == 1 over a quarter period; the result must be i*z."""
    reeb = ContactHamiltonianSpec(n=n, quadratic=(1.0,) * n)
    z0 = np.zeros(2 * n)
    z0[0] = 1.0
    z1, _ = integrate_flow(reeb, z0, 0.0, 0.25, settings, with_jacobian=False)
    return float(np.linalg.norm(z1 - mul_i(z0)))


def run(config: RunConfig, out_dir: str | Path) -> RunReport:
    """Execute calibration, detection, counting; write report artifacts."""
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    if config.steps_per_unit > 0:
        steps = config.steps_per_unit
    else:
        steps = calibrate_steps_per_unit(
            config.hamiltonian, horizon=1.0, tol=config.calibration_tol
        )
    settings = IntegratorSettings(steps_per_unit=steps)
    cal_err = _calibration_check(config.n, settings)
    timings["calibration"] = time.perf_counter() - t0

    if cal_err > 1e-8:
        report = RunReport(
            config=config,
            sweep=_empty_sweep(config),
            calibration_rel_err=cal_err,
            steps_per_unit=steps,
            timings=timings,
            exit_status=EXIT_ERROR,
        )
        write_outputs(report, out_dir)
        return report

    t0 = time.perf_counter()
    try:
        sweep = sweep_and_count(config.hamiltonian, config.sweep_params(), settings)
        exit_status = EXIT_OK
        if sweep.continuum_suspected or not sweep.bound_asserted:
            exit_status = EXIT_BOUNDS_NOT_ASSERTED
        elif sweep.bound_met is False:
            exit_status = EXIT_ERROR
    except RouteDisagreementError as exc:
        timings["detection"] = time.perf_counter() - t0
        report = RunReport(
            config=config,
            sweep=_empty_sweep(config),
            calibration_rel_err=cal_err,
            steps_per_unit=steps,
            timings=timings,
            exit_status=EXIT_ROUTE_DISAGREEMENT,
        )
        paths = write_outputs(report, out_dir)
        _dump_disagreement(exc, Path(out_dir))
        print(f"route disagreement: {exc}", file=sys.stderr)
        print(f"diagnostic dump written next to {paths['report']}", file=sys.stderr)
        return report
    timings["detection"] = time.perf_counter() - t0

    report = RunReport(
        config=config,
        sweep=sweep,
        calibration_rel_err=cal_err,
        steps_per_unit=steps,
        timings=timings,
        exit_status=exit_status,
    )
    t0 = time.perf_counter()
    write_outputs(report, out_dir)
    timings["write"] = time.perf_counter() - t0
    return report


def _empty_sweep(config: RunConfig):
    from .translated import SweepReport, index_data

    return SweepReport(
        records=[],
        event_ts=[],
        sphere_count=None,
        projective_count=None,
        index_data=index_data(config.n, config.rotation_pieces, config.nullity_tol),
        continuum_suspected=False,
        bound_asserted=False,
        bound_threshold=2 * config.n if config.mode == "projective" else 2,
        bound_met=None,
        route_stats={},
    )


def _dump_disagreement(exc: RouteDisagreementError, out_dir: Path) -> None:
    lines = [str(exc)]
    for key, records in exc.dump.items():
        lines.append(f"[{key}]")
        for rec in records:
            lines.append(
                f"t={rec.t!r} q={list(rec.q)!r} residual_fixed={rec.residual_fixed!r} "
                f"route={rec.route}"
            )
    (out_dir / "route_disagreement.txt").write_text("\n".join(lines) + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="contactmorse",
        description="Detect and count translated points of contactomorphisms "
        "of S^{2n-1} and RP^{2n-1}.",
        epilog="exit status: 0 success, 1 error, 2 bounds not asserted "
        "(degenerate/continuum), 3 route disagreement",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run a config file end to end")
    runp.add_argument("config", help="path to the JSON run configuration")
    runp.add_argument("--out", default="out", help="output directory (default: ./out)")
    runp.add_argument("--routes", choices=["direct", "genfun", "both"],
                      help="override the routes field")
    runp.add_argument("--mode", choices=["sphere", "projective"],
                      help="override the mode field")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
        overrides = {}
        if args.routes:
            overrides["routes"] = args.routes
        if args.mode:
            overrides["mode"] = args.mode
        if overrides:
            raw = dict(config.raw)
            raw.update(overrides)
            from .config import parse_config

            config = parse_config(raw)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    try:
        report = run(config, args.out)
    except Exception as exc:  # numerical failures map to the error status
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    out = Path(args.out)
    print(f"records: {len(report.sweep.records)}  "
          f"continuum: {report.sweep.continuum_suspected}  "
          f"exit: {report.exit_status}")
    print(f"wrote {out / 'report.txt'} and {out / 'records.csv'}")
    return report.exit_status


if __name__ == "__main__":
    sys.exit(main())
