"""Thermophysical primitives for pedestrian heat-stress assessment.

Covers the chain from raw instrument readings to a comparable heat-stress
number: saturation/partial vapor pressure, mean radiant temperature from a
black-globe thermometer, the UTCI equivalent temperature (operational
polynomial approximation), its assessment scale, and the offset of a
measured point against a shaded/sheltered virtual reference.

All functions are pure; identical inputs give bit-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime
from enum import Enum

from ._utci_coeffs import UTCI_POLYNOMIAL_TERMS
from .errors import DomainError, ValidityError

# Magnus saturation vapor pressure over water, result in hPa
MAGNUS_ES0 = 6.1078
MAGNUS_A = 17.27
MAGNUS_B = 237.3  # degC

# Validity bounds of the UTCI polynomial approximation
UTCI_T_AIR_MIN = -50.0
UTCI_T_AIR_MAX = 50.0
UTCI_WIND_MIN = 0.5   # m/s at 10 m; lower values are clamped up
UTCI_WIND_MAX = 17.0  # m/s at 10 m; higher values are an error
UTCI_DTR_MIN = -30.0  # t_mrt - t_air, degC
UTCI_DTR_MAX = 70.0
UTCI_VP_MAX = 50.0    # hPa

# Convective coefficient of the 150 mm standard globe (ASHRAE form)
ASHRAE_GLOBE_COEFF = 2.47e8
# Forced-convection coefficient of the general globe (ISO 7726 form)
ISO7726_GLOBE_COEFF = 1.1e8


class GlobeFormula(Enum):
    """Which globe-to-MRT conversion to apply."""

    ASHRAE_STANDARD_GLOBE = "ashrae_standard_globe"
    ISO7726_FORCED = "iso7726_forced"


class HeatStressCategory(Enum):
    """Ten-class UTCI assessment scale."""

    EXTREME_COLD_STRESS = "extreme cold stress"
    VERY_STRONG_COLD_STRESS = "very strong cold stress"
    STRONG_COLD_STRESS = "strong cold stress"
    MODERATE_COLD_STRESS = "moderate cold stress"
    SLIGHT_COLD_STRESS = "slight cold stress"
    NO_THERMAL_STRESS = "no thermal stress"
    MODERATE_HEAT_STRESS = "moderate heat stress"
    STRONG_HEAT_STRESS = "strong heat stress"
    VERY_STRONG_HEAT_STRESS = "very strong heat stress"
    EXTREME_HEAT_STRESS = "extreme heat stress"


# Lower bounds of each class; intervals are half-open [lower, upper)
_STRESS_SCALE = (
    (46.0, HeatStressCategory.EXTREME_HEAT_STRESS),
    (38.0, HeatStressCategory.VERY_STRONG_HEAT_STRESS),
    (32.0, HeatStressCategory.STRONG_HEAT_STRESS),
    (26.0, HeatStressCategory.MODERATE_HEAT_STRESS),
    (9.0, HeatStressCategory.NO_THERMAL_STRESS),
    (0.0, HeatStressCategory.SLIGHT_COLD_STRESS),
    (-13.0, HeatStressCategory.MODERATE_COLD_STRESS),
    (-27.0, HeatStressCategory.STRONG_COLD_STRESS),
    (-40.0, HeatStressCategory.VERY_STRONG_COLD_STRESS),
)


@dataclass(frozen=True)
class GlobeSpec:
    """Black-globe sensor geometry and conversion variant."""

    diameter: float = 0.15       # m
    emissivity: float = 0.95     # dimensionless
    formula_variant: GlobeFormula = GlobeFormula.ISO7726_FORCED

    def __post_init__(self):
        if not (self.diameter > 0):
            raise DomainError(f"globe diameter must be > 0, got {self.diameter}")
        if not (0 < self.emissivity <= 1):
            raise DomainError(f"globe emissivity must be in (0, 1], got {self.emissivity}")


@dataclass(frozen=True)
class ThermalState:
    """One set of raw thermal drivers at a measurement height."""

    t_air: float                     # degC
    rh: float                        # %
    wind: float                      # m/s at `height`
    height: float = 1.5              # m above ground
    t_globe: float | None = None     # degC
    net_radiation: float | None = None  # W/m2

    def __post_init__(self):
        if not (0 <= self.rh <= 100):
            raise DomainError(f"relative humidity must be in [0, 100], got {self.rh}")
        if self.wind < 0:
            raise DomainError(f"wind speed must be >= 0, got {self.wind}")
        if not (self.height > 0):
            raise DomainError(f"measurement height must be > 0, got {self.height}")


@dataclass(frozen=True)
class UtciInput:
    """Drivers of the UTCI polynomial, already at reference heights."""

    t_air: float          # degC
    t_mrt: float          # degC
    wind_10m: float       # m/s
    vapor_pressure: float  # hPa


@dataclass(frozen=True)
class ReferenceConditions:
    """Shaded/sheltered virtual reference built from control-station readings.

    MRT is pinned to the control air temperature and wind to 0.5 m/s so the
    reference behaves like a calm courtyard, independent of the control
    station's actual exposure.
    """

    t_air: float   # degC, control station at match time
    rh: float      # %, control station at match time
    matched_at: datetime | None = None

    @property
    def t_mrt_ref(self) -> float:
        return self.t_air

    @property
    def v_ref(self) -> float:
        return 0.5

    def to_utci_input(self) -> UtciInput:
        return UtciInput(
            t_air=self.t_air,
            t_mrt=self.t_air,
            wind_10m=0.5,
            vapor_pressure=vapor_pressure(self.t_air, self.rh),
        )


@dataclass(frozen=True)
class UtciOffset:
    """Signed departure of a measured point's UTCI from the reference UTCI."""

    value: float                       # degC
    point_id: str = ""
    timestamp: datetime | None = None
    control_matched_at: datetime | None = None

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise DomainError(f"UTCI offset must be finite, got {self.value}")


def vapor_pressure(t_air: float, rh: float) -> float:
    """Partial water vapor pressure (hPa) from air temperature and humidity.

    Uses the Magnus saturation form es(T) = 6.1078 * exp(17.27*T / (T+237.3)).
    """
    if not (math.isfinite(t_air) and math.isfinite(rh)):
        raise DomainError(f"non-finite input: t_air={t_air}, rh={rh}")
    if not (0 <= rh <= 100):
        raise DomainError(f"relative humidity must be in [0, 100], got {rh}")
    if not (-60 < t_air < 60):
        raise DomainError(f"air temperature must be in (-60, 60) degC, got {t_air}")
    es = MAGNUS_ES0 * math.exp(MAGNUS_A * t_air / (t_air + MAGNUS_B))
    return rh / 100.0 * es


def mrt_from_globe(t_globe: float, t_air: float, wind: float,
                   spec: GlobeSpec = GlobeSpec()) -> float:
    """Mean radiant temperature (degC) from a black-globe reading.

    The ASHRAE variant assumes the 150 mm standard globe; the ISO 7726
    forced-convection variant uses the sensor diameter and emissivity from
    `spec`. `wind` is the speed at the globe's height.
    """
    if wind < 0:
        raise DomainError(f"wind speed must be >= 0, got {wind}")
    if spec.formula_variant is GlobeFormula.ASHRAE_STANDARD_GLOBE:
        h = ASHRAE_GLOBE_COEFF * wind ** 0.5
    else:
        h = ISO7726_GLOBE_COEFF * wind ** 0.6 / (spec.emissivity * spec.diameter ** 0.4)
    radicand = (t_globe + 273.0) ** 4 + h * (t_globe - t_air)
    if radicand < 0:
        raise DomainError(
            f"no physical MRT for t_globe={t_globe}, t_air={t_air}, wind={wind}: "
            "radiative balance is negative"
        )
    return radicand ** 0.25 - 273.0


def clamp_wind(wind_10m: float) -> float:
    """Apply the polynomial's wind convention: clamp low speeds up to 0.5 m/s."""
    if wind_10m > UTCI_WIND_MAX:
        raise ValidityError(
            f"wind_10m={wind_10m} m/s exceeds the {UTCI_WIND_MAX} m/s validity bound"
        )
    if wind_10m < 0:
        raise DomainError(f"wind speed must be >= 0, got {wind_10m}")
    return max(wind_10m, UTCI_WIND_MIN)


def utci(inp: UtciInput) -> float:
    """UTCI equivalent temperature (degC) via the operational polynomial.

    Wind below 0.5 m/s is clamped up to 0.5; every other validity bound is
    enforced as an error naming the violated bound.
    """
    ta = inp.t_air
    if not (UTCI_T_AIR_MIN <= ta <= UTCI_T_AIR_MAX):
        raise ValidityError(
            f"t_air={ta} outside validity range [{UTCI_T_AIR_MIN}, {UTCI_T_AIR_MAX}] degC"
        )
    vel = clamp_wind(inp.wind_10m)
    d_tr = inp.t_mrt - ta
    if not (UTCI_DTR_MIN <= d_tr <= UTCI_DTR_MAX):
        raise ValidityError(
            f"t_mrt - t_air = {d_tr} outside validity range "
            f"[{UTCI_DTR_MIN}, {UTCI_DTR_MAX}] degC"
        )
    if not (0 <= inp.vapor_pressure <= UTCI_VP_MAX):
        raise ValidityError(
            f"vapor_pressure={inp.vapor_pressure} outside validity range "
            f"[0, {UTCI_VP_MAX}] hPa"
        )
    pa = inp.vapor_pressure / 10.0  # kPa
    result = ta
    for i, j, k, l, coeff in UTCI_POLYNOMIAL_TERMS:
        result += coeff * ta ** i * vel ** j * d_tr ** k * pa ** l
    return result


def utci_offset(mobile: UtciInput, ref: ReferenceConditions,
                point_id: str = "", timestamp: datetime | None = None) -> UtciOffset:
    """Difference between the UTCI at a measured point and the reference UTCI.

    Positive values mean more heat stress at the point than in a shaded,
    sheltered location under the same weather.
    """
    try:
        utci_mobile = utci(mobile)
    except (ValidityError, DomainError) as exc:
        raise type(exc)(f"mobile side: {exc}") from exc
    try:
        utci_ref = utci(ref.to_utci_input())
    except (ValidityError, DomainError) as exc:
        raise type(exc)(f"reference side: {exc}") from exc
    return UtciOffset(
        value=utci_mobile - utci_ref,
        point_id=point_id,
        timestamp=timestamp,
        control_matched_at=ref.matched_at,
    )


def heat_stress_category(utci_value: float) -> HeatStressCategory:
    """Map a UTCI value onto the ten-class assessment scale.

    Class boundaries are half-open [lower, upper), so e.g. 32.0 falls in
    strong heat stress.
    """
    if not math.isfinite(utci_value):
        raise DomainError(f"UTCI value must be finite, got {utci_value}")
    for lower, category in _STRESS_SCALE:
        if utci_value >= lower:
            return category
    return HeatStressCategory.EXTREME_COLD_STRESS


def wind_to_10m(wind: float, height: float, z0: float = 0.01) -> float:
    """Convert a wind speed to 10 m height with a neutral log profile.

    z0 is the aerodynamic roughness length in meters.
    """
    if wind < 0:
        raise DomainError(f"wind speed must be >= 0, got {wind}")
    if not (0 < z0 < height):
        raise DomainError(f"need 0 < z0 < height, got z0={z0}, height={height}")
    if height == 10.0:
        return wind
    return wind * math.log(10.0 / z0) / math.log(height / z0)
