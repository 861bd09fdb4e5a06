"""Command-line orchestration of the full pipeline.

Subcommands: check-day, process, compare, ucp. All data comes from one
declarative YAML config; logs go to stderr, data to files only, and every
output file is written atomically (temp + rename) so interrupted runs
never leave corrupt partial files.

Exit codes: 0 ok, 1 criterion rejection, 2 data missing or invalid,
3 drift detected.
"""

from __future__ import annotations

import csv
import io
import os
import sys
import tempfile
from datetime import date as date_cls
from datetime import datetime, time, timezone
from pathlib import Path

import click

from . import analysis, campaign as campaign_mod, raster as raster_mod, series as series_mod
from .config import RunConfig, load_config, load_plan, _parse_tz
from .errors import (ConfigError, DayRejectedError, DomainError, GridError,
                     MatchError, MicroclimapError, SchemaError)
from .series import DriftVerdict, StationRole

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_MISSING = 2
EXIT_DRIFT = 3

_ROLE_BY_NAME = {
    "control": StationRole.CONTROL,
    "case": StationRole.CASE,
    "onsite": StationRole.ONSITE_FIXED,
}

POINT_CSV_COLUMNS = (
    "point_id", "timestamp", "lon", "lat", "environment", "phase",
    "t_air", "rh", "t_mrt", "wind_10m", "utci_mobile", "utci_ref",
    "offset_c", "stress_category",
)


def write_atomic(path: Path, text: str) -> None:
    """Write a file via a temp file in the same directory plus rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def log(message: str) -> None:
    click.echo(message, err=True)


def load_station(cfg: RunConfig, name: str) -> series_mod.StationSeries:
    entry = cfg.station(name)
    return series_mod.parse_station_csv(
        entry.path, station_id=name,
        role=_ROLE_BY_NAME.get(name, StationRole.CASE),
        column_map=entry.column_map,
        sensor_heights=entry.sensor_heights,
    )


def point_results_csv(results, plan) -> str:
    """Serialize point results with full-precision, deterministic formatting."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(POINT_CSV_COLUMNS)
    for r in results:
        point = plan.point(r.point_id)
        from .thermal import heat_stress_category
        writer.writerow([
            r.point_id,
            r.timestamp.isoformat(),
            repr(point.location[0]), repr(point.location[1]),
            point.environment.value, plan.phase.value,
            repr(r.drivers.t_air), repr(r.drivers.rh),
            repr(r.drivers.t_mrt), repr(r.drivers.wind_10m),
            repr(r.utci_mobile), repr(r.utci_ref), repr(r.offset.value),
            heat_stress_category(r.utci_mobile).value,
        ])
    return buf.getvalue()


def read_point_results_csv(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise SchemaError(f"no point results in {path}")
    for row in rows:
        for key in ("lon", "lat", "offset_c", "utci_mobile", "utci_ref"):
            row[key] = float(row[key])
    return rows


def _load_ucp_raster(cfg: RunConfig) -> raster_mod.RasterLayer | None:
    ucp_path = cfg.rasters.get("ucp")
    if ucp_path is None:
        computed = cfg.output_dir / "ucp.asc"
        if computed.exists():
            ucp_path = computed
    if ucp_path is None:
        return None
    return raster_mod.parse_ascii_grid(ucp_path, raster_mod.Semantic.UCP)


@click.group()
@click.option("--config", "-c", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Run configuration YAML.")
@click.pass_context
def main(ctx, config_path):
    """Pedestrian heat-stress mapping from fixed and mobile microclimate logs."""
    try:
        ctx.obj = load_config(config_path)
    except (ConfigError, OSError) as exc:
        log(f"config error: {exc}")
        ctx.exit(EXIT_MISSING)


def _day_summary_for(cfg: RunConfig, control, day, tz, oktas):
    return campaign_mod.derive_day_summary(control, day, oktas, tz, z0=cfg.z0)


@main.command("check-day")
@click.argument("day")
@click.option("--oktas", type=float, default=None,
              help="Observed cloud cover; defaults to the matching campaign's value.")
@click.option("--tz", "tz_offset", default=None,
              help="Local UTC offset like +02:00; defaults to the matching campaign's zone.")
@click.pass_obj
def check_day(cfg: RunConfig, day, oktas, tz_offset):
    """Report whether DAY (YYYY-MM-DD) qualifies as a warm radiative day."""
    try:
        day = date_cls.fromisoformat(day)
        tz = _parse_tz(tz_offset) if tz_offset else None
        if oktas is None or tz is None:
            for entry in cfg.campaigns.values():
                plan = load_plan(entry.plan_path)
                if plan.day == day:
                    oktas = entry.cloud_cover_oktas if oktas is None else oktas
                    tz = plan.tz if tz is None else tz
                    break
        if oktas is None:
            raise ConfigError(f"no campaign on {day}; pass --oktas explicitly")
        if tz is None:
            tz = timezone.utc
        control = load_station(cfg, "control")
        summary = _day_summary_for(cfg, control, day, tz, oktas)
    except (MatchError, SchemaError, ConfigError, ValueError) as exc:
        log(f"cannot evaluate day: {exc}")
        sys.exit(EXIT_MISSING)

    result = campaign_mod.day_filter(summary, cfg.day_thresholds)
    click.echo(f"day {day.isoformat()}: t_max={summary.t_max:.1f} degC, "
               f"t_min={summary.t_min:.1f} degC, "
               f"cloud cover={summary.cloud_cover_oktas:g} oktas, "
               f"stability class={summary.stability_class.value}, "
               f"mean daytime wind={summary.mean_daytime_wind:.2f} m/s")
    checks = [
        (f"t_max > {cfg.day_thresholds.t_max_above} degC",
         summary.t_max > cfg.day_thresholds.t_max_above),
        (f"t_min > {cfg.day_thresholds.t_min_above} degC",
         summary.t_min > cfg.day_thresholds.t_min_above),
        (f"cloud cover <= {cfg.day_thresholds.max_cloud_oktas} oktas",
         summary.cloud_cover_oktas <= cfg.day_thresholds.max_cloud_oktas),
        ("stability class in {A, A-B}",
         summary.stability_class in (campaign_mod.StabilityClass.A,
                                     campaign_mod.StabilityClass.AB)),
    ]
    for label, ok in checks:
        click.echo(f"  [{'pass' if ok else 'FAIL'}] {label}")
    click.echo("verdict: " + ("accepted" if result.accepted else "rejected"))
    sys.exit(EXIT_OK if result.accepted else EXIT_REJECTED)


@main.command("process")
@click.argument("campaign_id")
@click.option("--allow-drift", is_flag=True,
              help="Exit 0 even when the on-site drift check fails.")
@click.option("--force-day", is_flag=True,
              help="Process even if the day filter rejects the campaign day.")
@click.pass_obj
def process(cfg: RunConfig, campaign_id, allow_drift, force_day):
    """Run the mobile pipeline for one campaign and write its outputs."""
    try:
        entry = cfg.campaigns[campaign_id]
    except KeyError:
        log(f"unknown campaign {campaign_id!r}")
        sys.exit(EXIT_MISSING)
    try:
        plan = load_plan(entry.plan_path)
        control = load_station(cfg, "control")
        onsite = (load_station(cfg, plan.onsite_station_id)
                  if plan.onsite_station_id else None)
        log_samples = campaign_mod.parse_mobile_csv(entry.mobile_log_path)
        summary = _day_summary_for(cfg, control, plan.day, plan.tz,
                                   entry.cloud_cover_oktas)
    except (ConfigError, SchemaError, MatchError, DomainError) as exc:
        log(f"cannot process campaign: {exc}")
        sys.exit(EXIT_MISSING)

    try:
        results, report = campaign_mod.process_campaign(
            plan, log_samples, control,
            day_summary=summary, onsite=onsite,
            override_day_filter=force_day,
            globe=cfg.globe, z0=cfg.z0,
            stabilization_delta_c=cfg.stabilization_delta_c,
            drift_thresholds=cfg.drift_thresholds,
        )
    except DayRejectedError as exc:
        log(f"campaign day rejected:")
        for reason in exc.reasons:
            log(f"  - {reason}")
        log("use --force-day to process anyway")
        sys.exit(EXIT_REJECTED)
    except (DomainError, MatchError) as exc:
        log(f"campaign failed: {exc}")
        sys.exit(EXIT_MISSING)

    ucp = _load_ucp_raster(cfg)
    out = cfg.output_dir / campaign_id
    write_atomic(out / "points.csv", point_results_csv(results, plan))
    collection = raster_mod.export_heat_map(results, plan, ucp)
    write_atomic(out / "points.geojson", raster_mod.geojson_dumps(collection))
    write_atomic(out / "report.txt", report.summary() + "\n")
    log(f"wrote {len(results)} point results to {out}")
    for point_id, reason in report.failures:
        log(f"point {point_id} unusable: {reason}")

    if (report.drift is not None
            and report.drift.verdict is DriftVerdict.DRIFTING
            and not allow_drift):
        log("drift detected on the on-site station: " + report.drift.summary())
        sys.exit(EXIT_DRIFT)
    sys.exit(EXIT_OK)


def _match_points(before_rows, after_rows, after_plan):
    """Pair after points with their before counterparts via displaced_from."""
    before_by_id = {r["point_id"]: r for r in before_rows}
    matched, unmatched = [], []
    for row in after_rows:
        point = after_plan.point(row["point_id"])
        before_id = point.displaced_from or row["point_id"]
        if before_id in before_by_id:
            matched.append((before_by_id[before_id], row))
        else:
            unmatched.append(row["point_id"])
    return matched, unmatched


@main.command("compare")
@click.argument("before_id")
@click.argument("after_id")
@click.pass_obj
def compare(cfg: RunConfig, before_id, after_id):
    """Before/after comparison: per-point deltas, BACI effect, UCP correlation."""
    try:
        before_plan = load_plan(cfg.campaigns[before_id].plan_path)
        after_plan = load_plan(cfg.campaigns[after_id].plan_path)
    except KeyError as exc:
        log(f"unknown campaign {exc}")
        sys.exit(EXIT_MISSING)
    before_csv = cfg.output_dir / before_id / "points.csv"
    after_csv = cfg.output_dir / after_id / "points.csv"
    for p in (before_csv, after_csv):
        if not p.exists():
            log(f"missing processed results {p}; run `process` first")
            sys.exit(EXIT_MISSING)
    before_rows = read_point_results_csv(before_csv)
    after_rows = read_point_results_csv(after_csv)

    out = cfg.output_dir / f"compare_{before_id}_{after_id}"
    report_lines = [f"comparison {before_id} -> {after_id}"]

    matched, unmatched = _match_points(before_rows, after_rows, after_plan)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["point_id_before", "point_id_after", "environment",
                     "offset_before_c", "offset_after_c", "delta_c"])
    for b, a in matched:
        writer.writerow([b["point_id"], a["point_id"], a["environment"],
                         repr(b["offset_c"]), repr(a["offset_c"]),
                         repr(a["offset_c"] - b["offset_c"])])
    write_atomic(out / "point_deltas.csv", buf.getvalue())
    report_lines.append(f"matched points: {len(matched)}")
    for point_id in unmatched:
        report_lines.append(f"unmatched after point: {point_id}")

    # BACI on the fixed stations over the two campaign days
    try:
        case = load_station(cfg, "case")
        control = load_station(cfg, "control")
        offsets = series_mod.offset_series(case, control, cfg.baci_parameter,
                                           globe=cfg.globe, z0=cfg.z0)
        split = {"before": before_plan, "after": after_plan}
        periods = {}
        for label, plan in split.items():
            start = datetime.combine(plan.day, time(0, 0), plan.tz)
            end = datetime.combine(plan.day, time(23, 59, 59), plan.tz)
            idx = [i for i, t in enumerate(offsets.times) if start <= t <= end]
            periods[label] = series_mod.OffsetSeries(
                offsets.parameter, offsets.case_id, offsets.control_id,
                [offsets.times[i] for i in idx], [offsets.values[i] for i in idx])
        estimate = analysis.baci_effect(
            analysis.BaciDataset(before=periods["before"], after=periods["after"]),
            seed=cfg.seed)
        report_lines.append(estimate.summary())
    except (ConfigError, DomainError, MatchError, SchemaError) as exc:
        report_lines.append(f"BACI effect unavailable: {exc}")

    # Figure-5 style association against the configured UCP raster
    ucp = _load_ucp_raster(cfg)
    if ucp is None:
        report_lines.append("no UCP raster configured; correlation skipped")
    else:
        pairs = []
        for row in before_rows + after_rows:
            value = raster_mod.sample_at(ucp, row["lon"], row["lat"])
            if value is not None:
                pairs.append((row["offset_c"], value))
        try:
            corr = analysis.correlate_offset_ucp(pairs)
            report_lines.append(
                f"offset vs UCP: spearman_rho={corr.spearman_rho:.3f}, "
                f"pearson_r={corr.pearson_r:.3f}, n={corr.n}")
        except DomainError as exc:
            report_lines.append(f"correlation unavailable: {exc}")
        if pairs:
            write_atomic(out / "scatter.csv", analysis.scatter_csv(pairs))
            write_atomic(out / "scatter.svg", analysis.scatter_svg(pairs))

    write_atomic(out / "report.txt", "\n".join(report_lines) + "\n")
    click.echo("\n".join(report_lines))
    sys.exit(EXIT_OK)


@main.command("ucp")
@click.pass_obj
def ucp(cfg: RunConfig):
    """Compute the Urban Cooling Potential raster from the configured layers."""
    needed = ("albedo", "vegetation", "irradiance")
    missing = [n for n in needed if n not in cfg.rasters]
    if missing:
        log(f"missing raster layers in config: {', '.join(missing)}")
        sys.exit(EXIT_MISSING)
    try:
        albedo = raster_mod.parse_ascii_grid(cfg.rasters["albedo"],
                                             raster_mod.Semantic.ALBEDO)
        vegetation = raster_mod.parse_ascii_grid(cfg.rasters["vegetation"],
                                                 raster_mod.Semantic.VEGETATION_FRACTION)
        if cfg.irradiance_clear_sky_max is not None:
            raw = raster_mod.parse_ascii_grid(cfg.rasters["irradiance"],
                                              raster_mod.Semantic.IRRADIANCE_RAW)
            irradiance = raster_mod.normalize_irradiance(raw, cfg.irradiance_clear_sky_max)
        else:
            irradiance = raster_mod.parse_ascii_grid(
                cfg.rasters["irradiance"], raster_mod.Semantic.IRRADIANCE_NORMALIZED)
        result = raster_mod.compute_ucp(albedo, vegetation, irradiance,
                                        formula=cfg.ucp_formula)
    except (GridError, DomainError) as exc:
        log(f"UCP computation failed: {exc}")
        sys.exit(EXIT_MISSING)
    buf = io.StringIO()
    raster_mod.write_ascii_grid(result, buf)
    write_atomic(cfg.output_dir / "ucp.asc", buf.getvalue())
    log(f"wrote {cfg.output_dir / 'ucp.asc'}")
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
