"""Report and record serialization.

records.csv and report.txt are bit-stable across reruns of the same config
on the same platform: fixed ordering, shortest round-trip float formatting,
no timestamps.  Wall-clock timings go to a separate timings.txt sidecar that
is explicitly outside the bit-stability contract.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

from .config import RunConfig
from .translated import SweepReport, TranslatedPointRecord


@dataclass
class RunReport:
    config: RunConfig
    sweep: SweepReport
    calibration_rel_err: float
    steps_per_unit: int
    timings: dict[str, float]
    exit_status: int


def _fmt(x: float) -> str:
    return repr(float(x))


def _nondeg_str(flag: bool | None) -> str:
    if flag is None:
        return "indeterminate"
    return "true" if flag else "false"


def records_csv(records: list[TranslatedPointRecord], n: int) -> str:
    """CSV text: q components, t, residuals, nondegeneracy, route; one row
    per record sorted by (t, q)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = (
        [f"q_x{j + 1}" for j in range(n)]
        + [f"q_y{j + 1}" for j in range(n)]
        + ["t", "residual_fixed", "residual_g", "nondegenerate", "route"]
    )
    writer.writerow(header)
    for rec in sorted(records, key=lambda r: (r.t, r.q)):
        row = [_fmt(v) for v in rec.q]
        row += [
            _fmt(rec.t),
            _fmt(rec.residual_fixed),
            _fmt(rec.residual_g),
            _nondeg_str(rec.nondegenerate),
            rec.route,
        ]
        writer.writerow(row)
    return buf.getvalue()


def _bound_outcome(sweep: SweepReport) -> str:
    if not sweep.bound_asserted:
        return "not_asserted"
    return "met" if sweep.bound_met else "failed"


def report_text(report: RunReport) -> str:
    """Structured-text run report; every assertion outcome is explicit."""
    cfg = report.config
    sweep = report.sweep
    lines = [
        "contactmorse run report",
        f"schema_version = {cfg.raw.get('schema_version', 1)}",
        f"config_hash = {cfg.config_hash()}",
        f"config = {cfg.canonical_json()}",
        f"n = {cfg.n}",
        f"mode = {cfg.mode}",
        f"routes = {cfg.routes}",
        "",
        "[calibration]",
        f"reeb_quarter_turn_rel_err = {_fmt(report.calibration_rel_err)}",
        f"steps_per_unit = {report.steps_per_unit}",
        f"calibration_ok = {'true' if report.calibration_rel_err <= 1e-8 else 'false'}",
        "",
        "[detection]",
        f"records = {len(sweep.records)}",
        f"continuum_suspected = {'true' if sweep.continuum_suspected else 'false'}",
        f"event_ts = {','.join(_fmt(t) for t in sweep.event_ts)}",
        f"sphere_count = {sweep.sphere_count if sweep.sphere_count is not None else 'suppressed'}",
    ]
    if cfg.mode == "projective":
        pc = sweep.projective_count
        lines.append(f"projective_count = {pc if pc is not None else 'suppressed'}")
    for key in sorted(sweep.route_stats):
        lines.append(f"{key} = {sweep.route_stats[key]}")
    idx = sweep.index_data
    lines += [
        "",
        "[index]",
        f"index_a0 = {idx['index_a0']}",
        f"nullity_a0 = {idx['nullity_a0']}",
        f"index_a1 = {idx['index_a1']}",
        f"nullity_a1 = {idx['nullity_a1']}",
        f"index_jump = {idx['jump']}",
        f"index_jump_expected = {2 * cfg.n}",
        "",
        "[bounds]",
        f"bound_threshold = {sweep.bound_threshold}",
        f"bound_outcome = {_bound_outcome(sweep)}",
        "",
        f"exit_status = {report.exit_status}",
        "",
    ]
    return "\n".join(lines)


def timings_text(timings: dict[str, float]) -> str:
    lines = ["# wall-clock seconds per stage (not bit-stable)"]
    for name, seconds in timings.items():
        lines.append(f"{name} = {seconds:.3f}")
    lines.append("")
    return "\n".join(lines)


def write_outputs(report: RunReport, out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "records": out / "records.csv",
        "report": out / "report.txt",
        "timings": out / "timings.txt",
    }
    paths["records"].write_text(records_csv(report.sweep.records, report.config.n))
    paths["report"].write_text(report_text(report))
    paths["timings"].write_text(timings_text(report.timings))
    return paths
