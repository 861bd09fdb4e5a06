"""Declarative run configuration and campaign plan files (YAML).

All paths inside a config or plan file are resolved relative to the file
that declares them. Every protocol threshold (25/16 degC day filter,
3 oktas, 1 degC per 2 h drift, 2 degC otherwise) appears here with its
default value so a run is fully reproducible from one file.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, time, timedelta, timezone, tzinfo
from pathlib import Path

import yaml

from .campaign import CampaignPlan, DayFilterThresholds, Environment, Phase, TraversePoint
from .errors import ConfigError
from .series import DriftThresholds
from .thermal import GlobeFormula, GlobeSpec


def _parse_tz(value) -> tzinfo:
    if value in (None, "", "utc", "UTC"):
        return timezone.utc
    text = str(value)
    sign = -1 if text.startswith("-") else 1
    body = text.lstrip("+-")
    try:
        if ":" in body:
            hours, minutes = body.split(":")
        else:
            hours, minutes = body, "0"
        return timezone(sign * timedelta(hours=int(hours), minutes=int(minutes)))
    except ValueError as exc:
        raise ConfigError(f"cannot parse timezone offset {value!r}") from exc


def load_plan(path) -> CampaignPlan:
    """Load a campaign plan file."""
    path = Path(path)
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(f"plan file {path} is not a mapping")
    try:
        points = [
            TraversePoint(
                point_id=str(p["point_id"]),
                location=(float(p["lon"]), float(p["lat"])),
                environment=Environment(p["environment"]),
                displaced_from=p.get("displaced_from"),
            )
            for p in raw["points"]
        ]
        window = raw.get("measurement_window", ["12:00", "16:00"])
        day = raw["date"]
        if not isinstance(day, date):
            day = date.fromisoformat(str(day))
        return CampaignPlan(
            campaign_id=str(raw["campaign_id"]),
            phase=Phase(raw["phase"]),
            day=day,
            tz=_parse_tz(raw.get("timezone")),
            points=points,
            control_station_id=str(raw["control_station"]),
            onsite_station_id=raw.get("onsite_station"),
            window_start=time.fromisoformat(window[0]),
            window_end=time.fromisoformat(window[1]),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid plan file {path}: {exc}") from exc


@dataclass
class StationConfig:
    path: Path
    column_map: dict[str, str] | None = None
    sensor_heights: dict[str, float] | None = None


@dataclass
class CampaignConfig:
    plan_path: Path
    mobile_log_path: Path
    cloud_cover_oktas: float


@dataclass
class RunConfig:
    config_dir: Path
    stations: dict[str, StationConfig]     # keys: control, case, onsite, ...
    campaigns: dict[str, CampaignConfig]
    rasters: dict[str, Path]               # keys: albedo, vegetation, irradiance, ucp
    day_thresholds: DayFilterThresholds
    drift_thresholds: DriftThresholds
    stabilization_delta_c: float
    globe: GlobeSpec
    z0: float
    irradiance_clear_sky_max: float | None
    ucp_formula: str
    baci_parameter: str
    output_dir: Path
    seed: int

    def station(self, name: str) -> StationConfig:
        if name not in self.stations:
            raise ConfigError(f"no station {name!r} configured")
        return self.stations[name]


def load_config(path) -> RunConfig:
    """Load and validate a run configuration file."""
    path = Path(path)
    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}
    base = path.parent

    def resolve(p) -> Path:
        resolved = (base / p).resolve()
        if not resolved.exists():
            raise ConfigError(f"configured path does not exist: {resolved}")
        return resolved

    stations = {}
    for name, entry in (raw.get("stations") or {}).items():
        if isinstance(entry, str):
            stations[name] = StationConfig(path=resolve(entry))
        else:
            stations[name] = StationConfig(
                path=resolve(entry["path"]),
                column_map=entry.get("column_map"),
                sensor_heights=entry.get("sensor_heights"),
            )
    if "control" not in stations:
        raise ConfigError("a control station must be configured")

    campaigns = {}
    for cid, entry in (raw.get("campaigns") or {}).items():
        campaigns[cid] = CampaignConfig(
            plan_path=resolve(entry["plan"]),
            mobile_log_path=resolve(entry["mobile_log"]),
            cloud_cover_oktas=float(entry.get("cloud_cover_oktas", 0)),
        )

    rasters = {name: resolve(p) for name, p in (raw.get("rasters") or {}).items()}

    th = raw.get("thresholds") or {}
    day_thresholds = DayFilterThresholds(
        t_max_above=float(th.get("day_t_max_above_c", 25.0)),
        t_min_above=float(th.get("day_t_min_above_c", 16.0)),
        max_cloud_oktas=float(th.get("day_max_cloud_oktas", 3.0)),
    )
    drift_thresholds = DriftThresholds(
        short_window_amplitude=float(th.get("drift_amplitude_short_c", 1.0)),
        long_window_amplitude=float(th.get("drift_amplitude_long_c", 2.0)),
        short_window_hours=float(th.get("drift_short_window_hours", 2.0)),
        smoothing_seconds=float(th.get("drift_smoothing_seconds", 300.0)),
    )
    stabilization_delta_c = float(th.get("stabilization_delta_c", 0.15))
    for name, value in (("drift_amplitude_short_c", drift_thresholds.short_window_amplitude),
                        ("drift_amplitude_long_c", drift_thresholds.long_window_amplitude),
                        ("stabilization_delta_c", stabilization_delta_c)):
        if value <= 0:
            raise ConfigError(f"threshold {name} must be positive, got {value}")

    g = raw.get("globe") or {}
    globe = GlobeSpec(
        diameter=float(g.get("diameter_m", 0.15)),
        emissivity=float(g.get("emissivity", 0.95)),
        formula_variant=GlobeFormula(g.get("variant", "iso7726_forced")),
    )

    wind = raw.get("wind_profile") or {}
    irr = raw.get("irradiance") or {}

    output_dir = (base / raw.get("output_dir", "out")).resolve()
    return RunConfig(
        config_dir=base,
        stations=stations,
        campaigns=campaigns,
        rasters=rasters,
        day_thresholds=day_thresholds,
        drift_thresholds=drift_thresholds,
        stabilization_delta_c=stabilization_delta_c,
        globe=globe,
        z0=float(wind.get("z0_m", 0.01)),
        irradiance_clear_sky_max=(float(irr["clear_sky_max_wm2"])
                                  if "clear_sky_max_wm2" in irr else None),
        ucp_formula=str(raw.get("ucp_formula", "product")),
        baci_parameter=str(raw.get("baci_parameter", "utci")),
        output_dir=output_dir,
        seed=int(raw.get("seed", 0)),
    )
