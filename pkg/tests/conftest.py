"""Shared builders for synthetic stations, mobile logs, and oracle inversion."""

from __future__ import annotations

import math
from datetime import datetime, timedelta, timezone

from microclimap.campaign import MobileSample
from microclimap.series import Gap, StationRole, StationSeries, WeatherSample

UTC = timezone.utc
T0 = datetime(2019, 7, 25, 8, 0, tzinfo=UTC)


def make_series(values, start=T0, cadence_s=60.0, station_id="case",
                role=StationRole.CASE, rh=50.0, t_globe=None, wind=None,
                net_radiation=None, sensor_heights=None):
    """Station series from a list of air temperatures (other fields constant).

    `values` may also be a list of dicts overriding individual sample fields.
    """
    samples = []
    for i, v in enumerate(values):
        fields = {"t_air": v} if not isinstance(v, dict) else dict(v)
        fields.setdefault("rh", rh)
        fields.setdefault("t_globe", t_globe)
        fields.setdefault("wind", wind)
        fields.setdefault("net_radiation", net_radiation)
        ts = fields.pop("timestamp", start + timedelta(seconds=i * cadence_s))
        samples.append(WeatherSample(timestamp=ts, **fields))
    gaps = [Gap(a.timestamp, b.timestamp,
                (b.timestamp - a.timestamp).total_seconds() - cadence_s)
            for a, b in zip(samples, samples[1:])
            if (b.timestamp - a.timestamp).total_seconds() > 2 * cadence_s]
    kwargs = {"sensor_heights": sensor_heights} if sensor_heights else {}
    return StationSeries(station_id=station_id, role=role, samples=samples,
                         cadence=cadence_s, gaps=gaps, **kwargs)


def make_mobile_log(point_blocks, start=T0, cadence_s=15.0):
    """Mobile samples from [(point_id, n, fields), ...] blocks, back to back.

    `fields` maps sample attributes to constants or callables of the sample
    index within the block.
    """
    out = []
    t = start
    for point_id, n, fields in point_blocks:
        for i in range(n):
            resolved = {k: (v(i) if callable(v) else v) for k, v in fields.items()}
            resolved.setdefault("rh", 50.0)
            out.append(MobileSample(
                point_id=point_id,
                sample=WeatherSample(timestamp=t, **resolved),
            ))
            t += timedelta(seconds=cadence_s)
    return out


def bisect_root(f, lo, hi, tol=1e-10, max_iter=200):
    """Plain bisection; f(lo) and f(hi) must bracket a root."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    assert flo * fhi < 0, f"no sign change on [{lo}, {hi}]"
    for _ in range(max_iter):
        mid = (lo + hi) / 2
        fm = f(mid)
        if fm == 0 or hi - lo < tol:
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return (lo + hi) / 2


def invert_utci_for_mrt(target_utci, t_air, wind_10m, vp_hpa):
    """Find the MRT giving a target UTCI, via the independent reference poly."""
    from utci_reference import utci_reference

    def f(t_mrt):
        return utci_reference(t_air, max(wind_10m, 0.5), t_mrt - t_air,
                              vp_hpa / 10.0) - target_utci

    return bisect_root(f, t_air - 29.9, t_air + 69.9)


def invert_globe_for_mrt(t_mrt, t_air, wind, diameter=0.15, emissivity=0.95):
    """Find the globe reading whose ISO 7726 forced-convection MRT is t_mrt."""
    h = 1.1e8 * wind ** 0.6 / (emissivity * diameter ** 0.4)

    def f(t_globe):
        radicand = (t_globe + 273.0) ** 4 + h * (t_globe - t_air)
        if radicand < 0:
            return -1e9
        return radicand ** 0.25 - 273.0 - t_mrt

    return bisect_root(f, min(t_air, t_mrt) - 5.0, max(t_air, t_mrt) + 5.0)


# Mobile wind speed at 1.5 m whose 10 m log-profile equivalent is 0.5 m/s,
# i.e. exactly the sheltered reference wind.
V15_FOR_HALF = 0.5 * math.log(150) / math.log(1000)


def globe_for_offset(delta, t_air=30.0, rh=40.0):
    """Globe reading whose stabilized UTCI offset against constant reference
    conditions equals `delta`, built by inverting the reference polynomial."""
    from microclimap.thermal import vapor_pressure
    from utci_reference import utci_reference

    vp = vapor_pressure(t_air, rh)
    ref_u = utci_reference(t_air, 0.5, 0.0, vp / 10.0)
    if delta == 0.0:
        return t_air
    t_mrt = invert_utci_for_mrt(ref_u + delta, t_air, 0.5, vp)
    return invert_globe_for_mrt(t_mrt, t_air, V15_FOR_HALF)
