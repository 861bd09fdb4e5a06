"""Fixed-station time series: ingestion, smoothing, differencing, drift checks.

Stations log one multi-parameter sample per minute. Series are kept
immutable after parsing; gaps are annotated, never interpolated, and all
timestamps are normalized to UTC internally.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from enum import Enum

import numpy as np

from . import thermal
from .errors import DomainError, MatchError, SchemaError
from .thermal import GlobeSpec

REQUIRED_COLUMNS = ("timestamp", "t_air", "rh")
OPTIONAL_COLUMNS = ("t_globe", "wind", "net_radiation")

#: Parameters that can be extracted or derived from a series.
PARAMETERS = (
    "t_air", "rh", "t_globe", "wind", "net_radiation",
    "vapor_pressure", "t_mrt", "utci",
)

DEFAULT_SENSOR_HEIGHTS = {
    "t_air": 1.5, "rh": 1.5, "t_globe": 1.5, "wind": 4.0, "net_radiation": 4.0,
}


class StationRole(Enum):
    CASE = "case"
    CONTROL = "control"
    ONSITE_FIXED = "onsite_fixed"


class DriftVerdict(Enum):
    STABLE = "stable"
    DRIFTING = "drifting"


@dataclass(frozen=True)
class WeatherSample:
    """One timestamped multi-parameter reading."""

    timestamp: datetime  # timezone-aware, stored as UTC
    t_air: float
    rh: float | None
    t_globe: float | None = None
    wind: float | None = None
    net_radiation: float | None = None

    def __post_init__(self):
        if self.timestamp.tzinfo is None:
            raise DomainError(f"timestamp must be timezone-aware: {self.timestamp}")
        if self.rh is not None and not (0 <= self.rh <= 100):
            raise DomainError(f"relative humidity out of range at {self.timestamp}: {self.rh}")
        if self.wind is not None and self.wind < 0:
            raise DomainError(f"negative wind speed at {self.timestamp}: {self.wind}")


@dataclass(frozen=True)
class Gap:
    """Annotation for a hole larger than twice the nominal cadence."""

    start: datetime      # last sample before the hole
    end: datetime        # first sample after the hole
    duration_s: float    # length of the missing data span (delta minus cadence)


@dataclass
class LoadReport:
    rows_read: int = 0
    rows_kept: int = 0
    dropped_rows: int = 0
    drop_reasons: list[str] = field(default_factory=list)

    def summary(self) -> str:
        lines = [
            f"rows read: {self.rows_read}",
            f"rows kept: {self.rows_kept}",
            f"rows dropped: {self.dropped_rows}",
        ]
        lines.extend(f"  - {r}" for r in self.drop_reasons)
        return "\n".join(lines)


@dataclass
class StationSeries:
    """Sorted, gap-annotated time series for one station."""

    station_id: str
    role: StationRole
    samples: list[WeatherSample]
    cadence: float = 60.0  # seconds
    location: tuple[float, float] | None = None  # (lon, lat)
    sensor_heights: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_SENSOR_HEIGHTS))
    gaps: list[Gap] = field(default_factory=list)
    load_report: LoadReport | None = None

    @property
    def times(self) -> list[datetime]:
        return [s.timestamp for s in self.samples]

    def span(self) -> tuple[datetime, datetime]:
        return self.samples[0].timestamp, self.samples[-1].timestamp


def _parse_row(row: dict, colmap: dict[str, str]) -> WeatherSample:
    ts = datetime.fromisoformat(row[colmap["timestamp"]].strip())
    if ts.tzinfo is None:
        raise ValueError("timestamp lacks a UTC offset")

    def num(name, required):
        raw = row.get(colmap.get(name, name), "")
        raw = (raw or "").strip()
        if raw == "":
            if required:
                raise ValueError(f"missing value for {name}")
            return None
        value = float(raw)
        if not math.isfinite(value):
            raise ValueError(f"non-finite value for {name}")
        return value

    return WeatherSample(
        timestamp=ts.astimezone(timezone.utc),
        t_air=num("t_air", True),
        rh=num("rh", True),
        t_globe=num("t_globe", False),
        wind=num("wind", False),
        net_radiation=num("net_radiation", False),
    )


def parse_station_csv(source, station_id: str, role: StationRole = StationRole.CASE,
                      cadence: float = 60.0, column_map: dict[str, str] | None = None,
                      location: tuple[float, float] | None = None,
                      sensor_heights: dict[str, float] | None = None) -> StationSeries:
    """Parse a station log CSV into a validated series.

    `column_map` remaps canonical column names to the file's header names.
    Rows with unparseable or out-of-range values are dropped and counted in
    the series' load report; holes longer than twice the cadence become gap
    annotations.
    """
    colmap = {name: name for name in REQUIRED_COLUMNS + OPTIONAL_COLUMNS}
    if column_map:
        colmap.update(column_map)

    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, newline="") as fh:
            return parse_station_csv(fh, station_id, role, cadence, column_map,
                                     location, sensor_heights)

    reader = csv.DictReader(source)
    if reader.fieldnames is None:
        raise SchemaError("missing header row")
    missing = [colmap[c] for c in REQUIRED_COLUMNS if colmap[c] not in reader.fieldnames]
    if missing:
        raise SchemaError(f"missing mandatory columns: {', '.join(missing)}")

    report = LoadReport()
    samples: list[WeatherSample] = []
    for lineno, row in enumerate(reader, start=2):
        report.rows_read += 1
        try:
            samples.append(_parse_row(row, colmap))
        except (ValueError, DomainError) as exc:
            report.dropped_rows += 1
            report.drop_reasons.append(f"line {lineno}: {exc}")
    if not samples:
        raise SchemaError(f"no valid rows in station file for {station_id}")

    samples.sort(key=lambda s: s.timestamp)
    deduped = [samples[0]]
    for s in samples[1:]:
        if s.timestamp == deduped[-1].timestamp:
            report.dropped_rows += 1
            report.drop_reasons.append(f"duplicate timestamp {s.timestamp.isoformat()}")
        else:
            deduped.append(s)
    samples = deduped
    report.rows_kept = len(samples)

    deltas = [(b.timestamp - a.timestamp).total_seconds()
              for a, b in zip(samples, samples[1:])]
    # ignore gap deltas and require enough spacings for a meaningful median,
    # so isolated dropped rows do not masquerade as a cadence change
    regular = [d for d in deltas if d <= 2 * cadence]
    if len(regular) >= 5:
        median = float(np.median(regular))
        if abs(median - cadence) > 0.1 * cadence:
            raise SchemaError(
                f"declared cadence {cadence}s does not match median sample "
                f"spacing {median}s for {station_id}"
            )
    gaps = [Gap(a.timestamp, b.timestamp,
                (b.timestamp - a.timestamp).total_seconds() - cadence)
            for a, b in zip(samples, samples[1:])
            if (b.timestamp - a.timestamp).total_seconds() > 2 * cadence]

    return StationSeries(
        station_id=station_id,
        role=role,
        samples=samples,
        cadence=cadence,
        location=location,
        sensor_heights=dict(sensor_heights or DEFAULT_SENSOR_HEIGHTS),
        gaps=gaps,
        load_report=report,
    )


def write_station_csv(series: StationSeries, sink) -> None:
    """Serialize a series back to the canonical CSV schema (UTC timestamps)."""
    if isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__"):
        with open(sink, "w", newline="") as fh:
            write_station_csv(series, fh)
            return
    writer = csv.writer(sink)
    writer.writerow(REQUIRED_COLUMNS + OPTIONAL_COLUMNS)
    for s in series.samples:
        writer.writerow([
            s.timestamp.isoformat(),
            repr(s.t_air), repr(s.rh),
            "" if s.t_globe is None else repr(s.t_globe),
            "" if s.wind is None else repr(s.wind),
            "" if s.net_radiation is None else repr(s.net_radiation),
        ])


def sample_parameter(sample: WeatherSample, parameter: str,
                     sensor_heights: dict[str, float] | None = None,
                     globe: GlobeSpec = GlobeSpec(), z0: float = 0.01) -> float | None:
    """Extract or derive one parameter value from a sample.

    Returns None when the sample lacks a needed field. For station-level
    UTCI, missing globe readings fall back to MRT = air temperature and
    missing wind to the 0.5 m/s sheltered floor.
    """
    heights = sensor_heights or DEFAULT_SENSOR_HEIGHTS
    if parameter in ("t_air", "rh", "t_globe", "wind", "net_radiation"):
        return getattr(sample, parameter)
    if parameter == "vapor_pressure":
        if sample.rh is None:
            return None
        return thermal.vapor_pressure(sample.t_air, sample.rh)
    if parameter == "t_mrt":
        if sample.t_globe is None or sample.wind is None:
            return None
        return thermal.mrt_from_globe(sample.t_globe, sample.t_air, sample.wind, globe)
    if parameter == "utci":
        if sample.rh is None:
            return None
        if sample.t_globe is not None and sample.wind is not None:
            t_mrt = thermal.mrt_from_globe(sample.t_globe, sample.t_air, sample.wind, globe)
        else:
            t_mrt = sample.t_air
        if sample.wind is not None:
            wind_10m = thermal.wind_to_10m(sample.wind, heights.get("wind", 4.0), z0)
        else:
            wind_10m = 0.5
        return thermal.utci(thermal.UtciInput(
            t_air=sample.t_air, t_mrt=t_mrt, wind_10m=wind_10m,
            vapor_pressure=thermal.vapor_pressure(sample.t_air, sample.rh),
        ))
    raise DomainError(f"unknown parameter {parameter!r}")


def _gap_between(gaps: list[Gap], t1: datetime, t2: datetime) -> bool:
    lo, hi = (t1, t2) if t1 <= t2 else (t2, t1)
    return any(g.start >= lo and g.end <= hi for g in gaps)


def _smooth_values(times: list[datetime], values: list[float],
                   window_seconds: float, gaps: list[Gap] | None = None) -> list[float]:
    """Centered moving average with truncated edge windows; gaps not bridged."""
    gaps = gaps or []
    half = timedelta(seconds=window_seconds / 2.0)
    out = []
    lo = 0
    hi = 0
    n = len(times)
    for i, t in enumerate(times):
        while lo < n and times[lo] < t - half:
            lo += 1
        if hi < i:
            hi = i
        while hi + 1 < n and times[hi + 1] <= t + half:
            hi += 1
        window = [values[j] for j in range(lo, hi + 1)
                  if not _gap_between(gaps, t, times[j])]
        out.append(sum(window) / len(window))
    return out


def smooth(series: StationSeries, parameter: str,
           window_seconds: float = 300.0, **derive_kwargs) -> list[tuple[datetime, float]]:
    """Centered moving-average smoothing of one parameter of a series.

    Output timestamps are unchanged; edge windows use whatever part of the
    window exists; samples on the far side of a gap annotation are excluded.
    """
    if parameter not in PARAMETERS:
        raise DomainError(f"unknown parameter {parameter!r}")
    if window_seconds < series.cadence:
        raise DomainError(
            f"window {window_seconds}s is below the series cadence {series.cadence}s"
        )
    pairs = [(s.timestamp, sample_parameter(s, parameter, series.sensor_heights,
                                            **derive_kwargs))
             for s in series.samples]
    pairs = [(t, v) for t, v in pairs if v is not None]
    times = [t for t, _ in pairs]
    values = [v for _, v in pairs]
    smoothed = _smooth_values(times, values, window_seconds, series.gaps)
    return list(zip(times, smoothed))


@dataclass
class OffsetSeries:
    """Case-minus-control time series for one parameter."""

    parameter: str
    case_id: str
    control_id: str
    times: list[datetime]
    values: list[float]


def nearest_sample(series: StationSeries, when: datetime,
                   tolerance_s: float = 60.0) -> WeatherSample:
    """Nearest sample within the tolerance, or a MatchError."""
    times = series.times
    i = bisect_left(times, when)
    best = None
    for j in (i - 1, i):
        if 0 <= j < len(times):
            dt = abs((times[j] - when).total_seconds())
            if best is None or dt < best[0]:
                best = (dt, series.samples[j])
    if best is None or best[0] > tolerance_s:
        raise MatchError(
            f"no {series.station_id} sample within {tolerance_s}s of {when.isoformat()}"
        )
    return best[1]


def offset_series(case: StationSeries, control: StationSeries, parameter: str,
                  tolerance_s: float = 60.0, globe: GlobeSpec = GlobeSpec(),
                  z0: float = 0.01) -> OffsetSeries:
    """Case-minus-control differences at case timestamps.

    Each case sample is paired with the nearest control sample within the
    tolerance; unmatched samples are skipped. Derived parameters are
    computed on each side before differencing.
    """
    if parameter not in PARAMETERS:
        raise DomainError(f"unknown parameter {parameter!r}")
    c0, c1 = case.span()
    k0, k1 = control.span()
    if c1 < k0 or k1 < c0:
        raise MatchError(
            f"series {case.station_id} and {control.station_id} do not overlap in time"
        )
    times: list[datetime] = []
    values: list[float] = []
    for s in case.samples:
        try:
            ctrl = nearest_sample(control, s.timestamp, tolerance_s)
        except MatchError:
            continue
        v_case = sample_parameter(s, parameter, case.sensor_heights, globe, z0)
        v_ctrl = sample_parameter(ctrl, parameter, control.sensor_heights, globe, z0)
        if v_case is None or v_ctrl is None:
            continue
        times.append(s.timestamp)
        values.append(v_case - v_ctrl)
    return OffsetSeries(parameter, case.station_id, control.station_id, times, values)


@dataclass(frozen=True)
class DriftThresholds:
    """Amplitude limits deciding whether an offset can be treated as constant."""

    short_window_amplitude: float = 1.0  # degC, windows up to short_window_hours
    long_window_amplitude: float = 2.0   # degC, longer windows
    short_window_hours: float = 2.0
    smoothing_seconds: float = 300.0


@dataclass(frozen=True)
class DriftReport:
    parameter: str
    window: tuple[datetime, datetime]
    amplitude: float      # degC, max - min of smoothed offsets
    trend_slope: float    # degC per hour, least squares on raw offsets
    verdict: DriftVerdict
    threshold: float
    n_samples: int

    def summary(self) -> str:
        start, end = self.window
        return (
            f"drift check on {self.parameter} offset "
            f"[{start.isoformat()} .. {end.isoformat()}]: "
            f"amplitude {self.amplitude:.3f} degC (threshold {self.threshold:.1f}), "
            f"trend {self.trend_slope:+.3f} degC/h, "
            f"n={self.n_samples} -> {self.verdict.value}"
        )


def drift_diagnostic(offsets: OffsetSeries, window: tuple[datetime, datetime],
                     thresholds: DriftThresholds = DriftThresholds()) -> DriftReport:
    """Judge whether an offset series is stable over a window.

    Offsets are smoothed (5 min default) before the amplitude (max - min)
    is taken; the trend slope comes from an ordinary least-squares fit on
    the raw offsets. The verdict is drifting when either the smoothed
    amplitude or the total excursion of the fitted trend across the window
    exceeds the threshold for the window duration class; smoothing
    deliberately does not hide a steady monotone drift.
    """
    start, end = window
    if not offsets.times:
        raise DomainError("empty offset series")
    if end < offsets.times[0] or start > offsets.times[-1]:
        raise DomainError("window lies outside the offset series range")
    idx = [i for i, t in enumerate(offsets.times) if start <= t <= end]
    if len(idx) < 10:
        raise DomainError(f"need at least 10 samples in the window, found {len(idx)}")
    times = [offsets.times[i] for i in idx]
    values = [offsets.values[i] for i in idx]

    smoothed = _smooth_values(times, values, thresholds.smoothing_seconds)
    amplitude = max(smoothed) - min(smoothed)

    hours = np.array([(t - start).total_seconds() / 3600.0 for t in times])
    slope = float(np.polyfit(hours, np.array(values), 1)[0])

    duration_h = (end - start).total_seconds() / 3600.0
    threshold = (thresholds.short_window_amplitude
                 if duration_h <= thresholds.short_window_hours
                 else thresholds.long_window_amplitude)
    # small relative guard so a trend landing exactly on the threshold is
    # classified deterministically as drifting
    trend_excursion = abs(slope) * duration_h
    drifting = (amplitude > threshold
                or trend_excursion > threshold * (1.0 - 1e-9))
    verdict = DriftVerdict.DRIFTING if drifting else DriftVerdict.STABLE
    return DriftReport(
        parameter=offsets.parameter,
        window=window,
        amplitude=amplitude,
        trend_slope=slope,
        verdict=verdict,
        threshold=threshold,
        n_samples=len(idx),
    )
