"""Statistical layer: BACI effect estimation and offset-vs-UCP association.

The BACI (before-after-control-impact) estimator works on case-minus-
control offset series so that common weather variation cancels; its
confidence interval bootstraps whole days rather than individual samples
because 1-minute weather readings are strongly autocorrelated.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

import numpy as np
from scipy import stats

from .errors import DomainError
from .series import OffsetSeries


@dataclass
class BaciDataset:
    """Offsets for one parameter split into before/after periods."""

    before: OffsetSeries
    after: OffsetSeries

    def __post_init__(self):
        if self.before.parameter != self.after.parameter:
            raise DomainError(
                f"parameter mismatch: {self.before.parameter} vs {self.after.parameter}")
        if self.before.times and self.after.times:
            b_lo, b_hi = min(self.before.times), max(self.before.times)
            a_lo, a_hi = min(self.after.times), max(self.after.times)
            if b_hi >= a_lo and a_hi >= b_lo:
                raise DomainError("before and after periods overlap in time")

    @property
    def parameter(self) -> str:
        return self.before.parameter


@dataclass(frozen=True)
class EffectEstimate:
    effect: float    # degC, mean(after) - mean(before)
    ci_low: float
    ci_high: float
    n_before: int
    n_after: int
    method: str = "baci-bootstrap"

    def __post_init__(self):
        if not self.ci_low <= self.effect <= self.ci_high:
            raise DomainError(
                f"confidence interval [{self.ci_low}, {self.ci_high}] does not "
                f"bracket the effect {self.effect}")

    def summary(self) -> str:
        return (f"BACI effect: {self.effect:+.3f} degC "
                f"(95% CI [{self.ci_low:+.3f}, {self.ci_high:+.3f}], "
                f"n_before={self.n_before}, n_after={self.n_after}, {self.method})")


def _filter_hours(times, values, hour_filter):
    if hour_filter is None:
        return list(times), list(values)
    h1, h2 = hour_filter
    kept = [(t, v) for t, v in zip(times, values) if h1 <= t.hour < h2]
    return [t for t, _ in kept], [v for _, v in kept]


def _day_blocks(times: list[datetime], values: list[float]):
    """Group values by calendar date (UTC), returning per-day sums and counts."""
    days: dict = {}
    for t, v in zip(times, values):
        key = t.date()
        total, count = days.get(key, (0.0, 0))
        days[key] = (total + v, count + 1)
    ordered = sorted(days)
    sums = np.array([days[d][0] for d in ordered])
    counts = np.array([days[d][1] for d in ordered], dtype=float)
    return sums, counts


def baci_effect(data: BaciDataset, hour_filter: tuple[int, int] | None = None,
                bootstrap_n: int = 2000, seed: int = 0,
                ci_level: float = 0.95) -> EffectEstimate:
    """Mean after-minus-before offset with a day-block percentile bootstrap CI.

    Days (not samples) are resampled with replacement independently in each
    period; the random stream is split per resample index, so the estimate
    is bit-reproducible for a fixed seed regardless of evaluation order.
    """
    tb, vb = _filter_hours(data.before.times, data.before.values, hour_filter)
    ta, va = _filter_hours(data.after.times, data.after.values, hour_filter)
    if not vb:
        raise DomainError("before period is empty after filtering")
    if not va:
        raise DomainError("after period is empty after filtering")

    effect = float(np.mean(va) - np.mean(vb))

    sums_b, counts_b = _day_blocks(tb, vb)
    sums_a, counts_a = _day_blocks(ta, va)
    n_days_b, n_days_a = len(sums_b), len(sums_a)

    children = np.random.SeedSequence(seed).spawn(bootstrap_n)
    resampled = np.empty(bootstrap_n)
    for k in range(bootstrap_n):
        rng = np.random.default_rng(children[k])
        ib = rng.integers(0, n_days_b, n_days_b)
        ia = rng.integers(0, n_days_a, n_days_a)
        mean_b = sums_b[ib].sum() / counts_b[ib].sum()
        mean_a = sums_a[ia].sum() / counts_a[ia].sum()
        resampled[k] = mean_a - mean_b
    alpha = (1.0 - ci_level) / 2.0
    ci_low = float(np.quantile(resampled, alpha))
    ci_high = float(np.quantile(resampled, 1.0 - alpha))
    return EffectEstimate(
        effect=effect,
        ci_low=min(ci_low, effect),
        ci_high=max(ci_high, effect),
        n_before=len(vb),
        n_after=len(va),
    )


@dataclass(frozen=True)
class CorrelationResult:
    spearman_rho: float
    pearson_r: float
    n: int


def correlate_offset_ucp(pairs: list[tuple[float, float]]) -> CorrelationResult:
    """Spearman (average-rank ties) and Pearson correlation of (offset, ucp) pairs."""
    if len(pairs) < 3:
        raise DomainError(f"need at least 3 pairs, got {len(pairs)}")
    offsets = np.array([p[0] for p in pairs])
    ucp = np.array([p[1] for p in pairs])
    if ucp.min() < 0 or ucp.max() > 1:
        raise DomainError("UCP values must lie in [0, 1]")
    if np.ptp(offsets) == 0 or np.ptp(ucp) == 0:
        raise DomainError("correlation undefined for constant input")
    rho = float(stats.spearmanr(offsets, ucp).statistic)
    r = float(stats.pearsonr(offsets, ucp).statistic)
    return CorrelationResult(spearman_rho=rho, pearson_r=r, n=len(pairs))


_SVG_WIDTH = 640
_SVG_HEIGHT = 480
_SVG_MARGIN = 50
_SVG_TICKS = 5


def _ticks(lo: float, hi: float) -> list[float]:
    if hi == lo:
        hi = lo + 1.0
    return [lo + (hi - lo) * i / (_SVG_TICKS - 1) for i in range(_SVG_TICKS)]


def scatter_svg(pairs: list[tuple[float, float]],
                x_label: str = "ucp", y_label: str = "utci_offset_c") -> str:
    """Minimal static SVG scatter plot; byte-deterministic for fixed input."""
    if not pairs:
        raise DomainError("no pairs to plot")
    xs = [p[1] for p in pairs]
    ys = [p[0] for p in pairs]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    plot_w = _SVG_WIDTH - 2 * _SVG_MARGIN
    plot_h = _SVG_HEIGHT - 2 * _SVG_MARGIN

    def px(x):
        return _SVG_MARGIN + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y):
        return _SVG_HEIGHT - _SVG_MARGIN - (y - y_lo) / (y_hi - y_lo) * plot_h

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_WIDTH}" '
        f'height="{_SVG_HEIGHT}" viewBox="0 0 {_SVG_WIDTH} {_SVG_HEIGHT}">',
        f'<rect x="0" y="0" width="{_SVG_WIDTH}" height="{_SVG_HEIGHT}" fill="white"/>',
        f'<line x1="{_SVG_MARGIN}" y1="{_SVG_HEIGHT - _SVG_MARGIN}" '
        f'x2="{_SVG_WIDTH - _SVG_MARGIN}" y2="{_SVG_HEIGHT - _SVG_MARGIN}" stroke="black"/>',
        f'<line x1="{_SVG_MARGIN}" y1="{_SVG_MARGIN}" '
        f'x2="{_SVG_MARGIN}" y2="{_SVG_HEIGHT - _SVG_MARGIN}" stroke="black"/>',
    ]
    for tick in _ticks(x_lo, x_hi):
        x = px(tick)
        lines.append(f'<line x1="{x:.2f}" y1="{_SVG_HEIGHT - _SVG_MARGIN}" '
                     f'x2="{x:.2f}" y2="{_SVG_HEIGHT - _SVG_MARGIN + 5}" stroke="black"/>')
        lines.append(f'<text x="{x:.2f}" y="{_SVG_HEIGHT - _SVG_MARGIN + 18}" '
                     f'font-size="10" text-anchor="middle">{tick:.3f}</text>')
    for tick in _ticks(y_lo, y_hi):
        y = py(tick)
        lines.append(f'<line x1="{_SVG_MARGIN - 5}" y1="{y:.2f}" '
                     f'x2="{_SVG_MARGIN}" y2="{y:.2f}" stroke="black"/>')
        lines.append(f'<text x="{_SVG_MARGIN - 8}" y="{y + 3:.2f}" '
                     f'font-size="10" text-anchor="end">{tick:.3f}</text>')
    lines.append(f'<text x="{_SVG_WIDTH / 2:.0f}" y="{_SVG_HEIGHT - 10}" '
                 f'font-size="12" text-anchor="middle">{x_label}</text>')
    lines.append(f'<text x="15" y="{_SVG_HEIGHT / 2:.0f}" font-size="12" '
                 f'text-anchor="middle" transform="rotate(-90 15 {_SVG_HEIGHT / 2:.0f})">'
                 f'{y_label}</text>')
    for offset, ucp in pairs:
        lines.append(f'<circle cx="{px(ucp):.2f}" cy="{py(offset):.2f}" r="3" '
                     f'fill="steelblue" fill-opacity="0.8"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def scatter_csv(pairs: list[tuple[float, float]]) -> str:
    """CSV body of (utci_offset_c, ucp) pairs, deterministic formatting."""
    if not pairs:
        raise DomainError("no pairs to export")
    rows = ["utci_offset_c,ucp"]
    rows.extend(f"{repr(o)},{repr(u)}" for o, u in pairs)
    return "\n".join(rows) + "\n"
