"""Stop-and-go mobile campaign processing.

Turns a raw point-tagged mobile log into per-point heat-stress offsets:
radiative-day filtering, stop segmentation, black-globe stabilization
detection, driver aggregation, control matching, and the final UTCI-offset
computation, plus a drift check against an on-site fixed station when one
is available.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from datetime import date, datetime, time, timedelta, timezone, tzinfo
from enum import Enum

from . import thermal
from .errors import (DayRejectedError, DomainError, MatchError, SchemaError,
                     ValidityError)
from .series import (DriftReport, DriftThresholds, StationSeries, WeatherSample,
                     drift_diagnostic, nearest_sample, offset_series)
from .thermal import (GlobeSpec, ReferenceConditions, UtciInput, UtciOffset,
                      heat_stress_category, utci, utci_offset, vapor_pressure,
                      wind_to_10m)

MOBILE_CADENCE_S = 15.0
SEGMENT_SPLIT_GAP_S = 60.0
MIN_SEGMENT_S = 300.0
STABILIZATION_WINDOW_S = 180.0
STABILIZATION_DELTA_C = 0.15  # globe sensor uncertainty
CONTROL_MATCH_TOLERANCE_S = 60.0

# Net radiation above which a day counts as strongly insolated
STRONG_INSOLATION_WM2 = 500.0


class Phase(Enum):
    BEFORE = "before"
    AFTER = "after"


class Environment(Enum):
    FULL_SUN = "full_sun"
    SHADE = "shade"
    VEGETATION_PROXIMITY = "vegetation_proximity"


class Insolation(Enum):
    STRONG = "strong"
    MODERATE = "moderate"
    SLIGHT = "slight"


class StabilityClass(Enum):
    A = "A"
    AB = "A-B"
    B = "B"
    BC = "B-C"
    C = "C"
    CD = "C-D"
    D = "D"
    E = "E"
    F = "F"


# Pasquill daytime classification: surface wind rows x insolation columns.
# Wind bins are half-open [lower, upper) in m/s at 10 m.
_PASQUILL_DAYTIME = (
    (2.0, (StabilityClass.A, StabilityClass.AB, StabilityClass.B)),
    (3.0, (StabilityClass.AB, StabilityClass.B, StabilityClass.C)),
    (5.0, (StabilityClass.B, StabilityClass.BC, StabilityClass.C)),
    (6.0, (StabilityClass.C, StabilityClass.CD, StabilityClass.D)),
    (math.inf, (StabilityClass.C, StabilityClass.D, StabilityClass.D)),
)
_INSOLATION_COLUMN = {Insolation.STRONG: 0, Insolation.MODERATE: 1, Insolation.SLIGHT: 2}


@dataclass(frozen=True)
class TraversePoint:
    point_id: str
    location: tuple[float, float]  # (lon, lat) or planar (x, y)
    environment: Environment
    displaced_from: str | None = None


@dataclass
class CampaignPlan:
    campaign_id: str
    phase: Phase
    day: date
    tz: tzinfo
    points: list[TraversePoint]
    control_station_id: str
    onsite_station_id: str | None = None
    window_start: time = time(12, 0)
    window_end: time = time(16, 0)

    def __post_init__(self):
        ids = [p.point_id for p in self.points]
        if len(ids) != len(set(ids)):
            raise DomainError(f"duplicate point ids in plan {self.campaign_id}")
        if not self.window_start < self.window_end:
            raise DomainError("measurement window start must precede its end")

    def point(self, point_id: str) -> TraversePoint:
        for p in self.points:
            if p.point_id == point_id:
                return p
        raise DomainError(f"unknown point id {point_id!r} in plan {self.campaign_id}")


@dataclass(frozen=True)
class MobileSample:
    """One mobile-instrument reading tagged with the traverse point it belongs to."""

    point_id: str
    sample: WeatherSample


@dataclass
class StopSegment:
    """A contiguous dwell at one traverse point."""

    point_id: str
    samples: list[WeatherSample]
    stabilization_window: tuple[datetime, datetime] | None = None
    stabilized: bool = False
    too_short: bool = False

    def span(self) -> tuple[datetime, datetime]:
        return self.samples[0].timestamp, self.samples[-1].timestamp


@dataclass(frozen=True)
class DaySummary:
    day: date
    t_max: float
    t_min: float
    cloud_cover_oktas: float
    stability_class: StabilityClass
    mean_daytime_wind: float  # m/s at 10 m

    def __post_init__(self):
        if not (0 <= self.cloud_cover_oktas <= 8):
            raise DomainError(f"cloud cover must be in [0, 8] oktas, got {self.cloud_cover_oktas}")
        if self.t_min > self.t_max:
            raise DomainError(f"t_min {self.t_min} exceeds t_max {self.t_max}")


@dataclass(frozen=True)
class DayFilterThresholds:
    t_max_above: float = 25.0
    t_min_above: float = 16.0
    max_cloud_oktas: float = 3.0


@dataclass(frozen=True)
class DayFilterResult:
    accepted: bool
    reasons: list[str]  # empty when accepted


@dataclass(frozen=True)
class AggregatedDrivers:
    """Stabilization-window means, ready for the UTCI evaluation."""

    timestamp: datetime  # window center
    t_air: float
    rh: float
    t_globe: float
    wind_measured: float  # m/s at measurement height
    wind_10m: float
    t_mrt: float
    sample_counts: dict[str, int]


@dataclass(frozen=True)
class PointResult:
    point_id: str
    timestamp: datetime
    drivers: AggregatedDrivers
    utci_mobile: float
    utci_ref: float
    offset: UtciOffset

    def __post_init__(self):
        if self.offset.value != self.utci_mobile - self.utci_ref:
            raise DomainError(
                f"inconsistent offset for {self.point_id}: "
                f"{self.offset.value} != {self.utci_mobile} - {self.utci_ref}"
            )


@dataclass
class CampaignReport:
    campaign_id: str
    day_filter: DayFilterResult | None
    day_filter_overridden: bool
    failures: list[tuple[str, str]]  # (point_id, reason)
    drift: DriftReport | None

    def summary(self) -> str:
        lines = [f"campaign {self.campaign_id}"]
        if self.day_filter is not None:
            status = "accepted" if self.day_filter.accepted else "REJECTED"
            if self.day_filter_overridden:
                status += " (override)"
            lines.append(f"day filter: {status}")
            lines.extend(f"  - {r}" for r in self.day_filter.reasons)
        for point_id, reason in self.failures:
            lines.append(f"point {point_id} unusable: {reason}")
        if self.drift is not None:
            lines.append(self.drift.summary())
        return "\n".join(lines)


def pasquill_class(wind_10m: float, insolation: Insolation) -> StabilityClass:
    """Daytime Pasquill stability class from surface wind and insolation."""
    if wind_10m < 0:
        raise DomainError(f"wind speed must be >= 0, got {wind_10m}")
    column = _INSOLATION_COLUMN[insolation]
    for upper, row in _PASQUILL_DAYTIME:
        if wind_10m < upper:
            return row[column]
    raise AssertionError("unreachable")


def day_filter(day: DaySummary,
               thresholds: DayFilterThresholds = DayFilterThresholds()) -> DayFilterResult:
    """Accept warm radiative days: hot, clear-sky, strongly unstable.

    Every failed criterion is listed in the rejection reasons.
    """
    reasons = []
    if not day.t_max > thresholds.t_max_above:
        reasons.append(
            f"t_max {day.t_max} degC not above {thresholds.t_max_above} degC")
    if not day.t_min > thresholds.t_min_above:
        reasons.append(
            f"t_min {day.t_min} degC not above {thresholds.t_min_above} degC")
    if not day.cloud_cover_oktas <= thresholds.max_cloud_oktas:
        reasons.append(
            f"cloud cover {day.cloud_cover_oktas} oktas exceeds {thresholds.max_cloud_oktas}")
    if day.stability_class not in (StabilityClass.A, StabilityClass.AB):
        reasons.append(
            f"stability class {day.stability_class.value} is not A or A-B")
    return DayFilterResult(accepted=not reasons, reasons=reasons)


def derive_day_summary(control: StationSeries, day: date, cloud_cover_oktas: float,
                       tz: tzinfo, z0: float = 0.01) -> DaySummary:
    """Build a day summary from control-station data plus operator cloud cover.

    Insolation is classed as strong when net radiation averaged over the
    12:00-14:00 local window exceeds 500 W/m2, else moderate (heuristic);
    the mean daytime wind is taken over 12:00-16:00 local and converted to
    10 m for the Pasquill lookup.
    """
    day_start = datetime.combine(day, time(0, 0), tz)
    day_end = day_start + timedelta(days=1)
    day_samples = [s for s in control.samples if day_start <= s.timestamp < day_end]
    if not day_samples:
        raise MatchError(f"control series has no samples on {day.isoformat()}")

    t_values = [s.t_air for s in day_samples]
    wind_height = control.sensor_heights.get("wind", 4.0)

    noon_lo = datetime.combine(day, time(12, 0), tz)
    noon_hi = datetime.combine(day, time(14, 0), tz)
    noon_rn = [s.net_radiation for s in day_samples
               if s.net_radiation is not None and noon_lo <= s.timestamp < noon_hi]
    strong = bool(noon_rn) and sum(noon_rn) / len(noon_rn) > STRONG_INSOLATION_WM2
    insolation = Insolation.STRONG if strong else Insolation.MODERATE

    win_lo = datetime.combine(day, time(12, 0), tz)
    win_hi = datetime.combine(day, time(16, 0), tz)
    winds = [s.wind for s in day_samples
             if s.wind is not None and win_lo <= s.timestamp < win_hi]
    if winds:
        mean_wind_10m = wind_to_10m(sum(winds) / len(winds), wind_height, z0)
    else:
        mean_wind_10m = 0.0

    return DaySummary(
        day=day,
        t_max=max(t_values),
        t_min=min(t_values),
        cloud_cover_oktas=cloud_cover_oktas,
        stability_class=pasquill_class(mean_wind_10m, insolation),
        mean_daytime_wind=mean_wind_10m,
    )


def parse_mobile_csv(source) -> list[MobileSample]:
    """Parse a point-tagged mobile log (timestamp, point_id, drivers)."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, newline="") as fh:
            return parse_mobile_csv(fh)
    reader = csv.DictReader(source)
    if reader.fieldnames is None or "point_id" not in reader.fieldnames:
        raise SchemaError("mobile log must carry a point_id column")
    required = {"timestamp", "t_air", "rh", "t_globe", "wind"}
    missing = required - set(reader.fieldnames)
    if missing:
        raise SchemaError(f"mobile log missing columns: {', '.join(sorted(missing))}")
    out = []
    for row in reader:
        ts = datetime.fromisoformat(row["timestamp"].strip())
        if ts.tzinfo is None:
            raise SchemaError(f"mobile log timestamp lacks a UTC offset: {row['timestamp']}")
        rh_raw = (row["rh"] or "").strip()
        out.append(MobileSample(
            point_id=row["point_id"].strip(),
            sample=WeatherSample(
                timestamp=ts.astimezone(timezone.utc),
                t_air=float(row["t_air"]),
                rh=float(rh_raw) if rh_raw else None,
                t_globe=float(row["t_globe"]),
                wind=float(row["wind"]),
            ),
        ))
    if not out:
        raise SchemaError("mobile log contains no rows")
    out.sort(key=lambda m: m.sample.timestamp)
    return out


def segment_stops(log: list[MobileSample], plan: CampaignPlan) -> list[StopSegment]:
    """Split the mobile log into per-point dwell segments.

    Contiguous runs of one point id become a segment; an internal time gap
    longer than 60 s splits the run; segments shorter than 5 minutes are
    flagged too short.
    """
    known = {p.point_id for p in plan.points}
    segments: list[StopSegment] = []
    current: list[WeatherSample] = []
    current_id: str | None = None

    def flush():
        if current_id is not None and current:
            duration = (current[-1].timestamp - current[0].timestamp).total_seconds()
            segments.append(StopSegment(
                point_id=current_id,
                samples=list(current),
                too_short=duration < MIN_SEGMENT_S,
            ))

    for m in log:
        if m.point_id not in known:
            raise DomainError(
                f"mobile log references unknown point id {m.point_id!r}")
        gap = (current
               and (m.sample.timestamp - current[-1].timestamp).total_seconds()
               > SEGMENT_SPLIT_GAP_S)
        if m.point_id != current_id or gap:
            flush()
            current = []
            current_id = m.point_id
        current.append(m.sample)
    flush()
    return segments


def detect_stabilization(segment: StopSegment,
                         delta_c: float = STABILIZATION_DELTA_C,
                         window_s: float = STABILIZATION_WINDOW_S) -> StopSegment:
    """Find the latest window over which the globe reading has settled.

    Scans fixed-length windows (3 min default) from the end of the segment
    backwards and keeps the first one whose globe-temperature range stays
    within the sensor uncertainty. Returns a copy of the segment with the
    stabilization fields set.
    """
    if any(s.t_globe is None for s in segment.samples):
        raise DomainError(
            f"segment at {segment.point_id} has samples without globe readings")
    times = [s.timestamp for s in segment.samples]
    span = timedelta(seconds=window_s)
    for i in range(len(times) - 1, -1, -1):
        end = times[i] + span
        if end > times[-1]:
            continue
        in_window = [s.t_globe for s in segment.samples
                     if times[i] <= s.timestamp <= end]
        if max(in_window) - min(in_window) <= delta_c:
            return replace(segment, stabilization_window=(times[i], end), stabilized=True)
    return replace(segment, stabilization_window=None, stabilized=False)


def aggregate_point(segment: StopSegment, globe: GlobeSpec = GlobeSpec(),
                    measurement_height: float = 1.5, z0: float = 0.01) -> AggregatedDrivers:
    """Average the drivers over the stabilization window.

    MRT is derived from the averaged globe/air/wind values; the wind speed
    is converted from the measurement height to 10 m with a neutral log
    profile for the UTCI evaluation.
    """
    if not segment.stabilized or segment.stabilization_window is None:
        raise DomainError(
            f"segment at {segment.point_id} never stabilized; point is unusable")
    lo, hi = segment.stabilization_window
    window = [s for s in segment.samples if lo <= s.timestamp <= hi]

    def mean_of(attr):
        values = [getattr(s, attr) for s in window if getattr(s, attr) is not None]
        if not values:
            raise DomainError(f"no {attr} readings in stabilization window "
                              f"at {segment.point_id}")
        return sum(values) / len(values), len(values)

    t_air, n_t = mean_of("t_air")
    rh, n_rh = mean_of("rh")
    t_globe, n_g = mean_of("t_globe")
    wind, n_w = mean_of("wind")
    t_mrt = thermal.mrt_from_globe(t_globe, t_air, wind, globe)
    return AggregatedDrivers(
        timestamp=lo + (hi - lo) / 2,
        t_air=t_air,
        rh=rh,
        t_globe=t_globe,
        wind_measured=wind,
        wind_10m=wind_to_10m(wind, measurement_height, z0),
        t_mrt=t_mrt,
        sample_counts={"t_air": n_t, "rh": n_rh, "t_globe": n_g, "wind": n_w},
    )


def match_control(timestamp: datetime, control: StationSeries,
                  tolerance_s: float = CONTROL_MATCH_TOLERANCE_S) -> ReferenceConditions:
    """Reference conditions from the nearest control sample."""
    s = nearest_sample(control, timestamp, tolerance_s)
    return ReferenceConditions(t_air=s.t_air, rh=s.rh, matched_at=s.timestamp)


def point_result_from_drivers(point_id: str, drivers: AggregatedDrivers,
                              ref: ReferenceConditions) -> PointResult:
    mobile_input = UtciInput(
        t_air=drivers.t_air,
        t_mrt=drivers.t_mrt,
        wind_10m=drivers.wind_10m,
        vapor_pressure=vapor_pressure(drivers.t_air, drivers.rh),
    )
    try:
        utci_mobile = utci(mobile_input)
    except (ValidityError, DomainError) as exc:
        raise type(exc)(f"mobile side: {exc}") from exc
    utci_ref = utci(ref.to_utci_input())
    offset = UtciOffset(
        value=utci_mobile - utci_ref,
        point_id=point_id,
        timestamp=drivers.timestamp,
        control_matched_at=ref.matched_at,
    )
    return PointResult(
        point_id=point_id,
        timestamp=drivers.timestamp,
        drivers=drivers,
        utci_mobile=utci_mobile,
        utci_ref=utci_ref,
        offset=offset,
    )


def process_campaign(plan: CampaignPlan, log: list[MobileSample],
                     control: StationSeries,
                     day_summary: DaySummary | None = None,
                     onsite: StationSeries | None = None,
                     override_day_filter: bool = False,
                     globe: GlobeSpec = GlobeSpec(), z0: float = 0.01,
                     stabilization_delta_c: float = STABILIZATION_DELTA_C,
                     drift_thresholds: DriftThresholds = DriftThresholds(),
                     control_tolerance_s: float = CONTROL_MATCH_TOLERANCE_S,
                     ) -> tuple[list[PointResult], CampaignReport]:
    """Run the full per-point pipeline for one campaign.

    Per-point failures are collected and reported; the campaign only fails
    outright when no point is usable. When an on-site fixed station is
    supplied, its UTCI offset against the control is drift-checked over the
    traverse span.
    """
    filter_result = day_filter(day_summary) if day_summary is not None else None
    overridden = False
    if filter_result is not None and not filter_result.accepted:
        if not override_day_filter:
            raise DayRejectedError(filter_result.reasons)
        overridden = True

    segments = segment_stops(log, plan)
    results: dict[str, PointResult] = {}
    failures: list[tuple[str, str]] = []
    seen: set[str] = set()
    for segment in segments:
        seen.add(segment.point_id)
        try:
            stabilized = detect_stabilization(segment, stabilization_delta_c)
            drivers = aggregate_point(stabilized, globe=globe, z0=z0)
            ref = match_control(drivers.timestamp, control, control_tolerance_s)
            results[segment.point_id] = point_result_from_drivers(
                segment.point_id, drivers, ref)
        except (DomainError, ValidityError, MatchError) as exc:
            failures.append((segment.point_id, str(exc)))
    for p in plan.points:
        if p.point_id not in seen:
            failures.append((p.point_id, "no mobile samples recorded"))
    # keep only failures for points that never produced a result
    failures = [(pid, why) for pid, why in failures if pid not in results]
    if not results:
        raise DomainError(
            f"campaign {plan.campaign_id} produced no usable points: "
            + "; ".join(f"{pid}: {why}" for pid, why in failures)
        )

    drift = None
    if onsite is not None and log:
        span_lo = log[0].sample.timestamp
        span_hi = log[-1].sample.timestamp
        offsets = offset_series(onsite, control, "utci", globe=globe, z0=z0)
        try:
            drift = drift_diagnostic(offsets, (span_lo, span_hi), drift_thresholds)
        except DomainError as exc:
            failures.append(("__drift__", f"drift check skipped: {exc}"))

    report = CampaignReport(
        campaign_id=plan.campaign_id,
        day_filter=filter_result,
        day_filter_overridden=overridden,
        failures=failures,
        drift=drift,
    )
    ordered = [results[p.point_id] for p in plan.points if p.point_id in results]
    return ordered, report
