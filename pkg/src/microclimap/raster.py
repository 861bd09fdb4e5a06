"""Raster layers and the Urban Cooling Potential indicator.

Grids travel as ESRI ASCII (.asc) files in planar coordinates; the site
extent is sub-hectare so no geodesic math is attempted. The UCP indicator
maps each cell to [0, 1]: 1 for bare sun-exposed dark pavement, 0 for
dense, shaded vegetation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import DomainError, GridError
from .thermal import heat_stress_category

_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize")


class Semantic(Enum):
    ALBEDO = "albedo"
    VEGETATION_FRACTION = "vegetation_fraction"
    IRRADIANCE_NORMALIZED = "irradiance_normalized"
    IRRADIANCE_RAW = "irradiance_raw"  # W/m2, input to normalize_irradiance
    UCP = "ucp"


#: Semantics whose non-nodata values must lie in [0, 1].
_UNIT_INTERVAL_SEMANTICS = frozenset({
    Semantic.ALBEDO, Semantic.VEGETATION_FRACTION,
    Semantic.IRRADIANCE_NORMALIZED, Semantic.UCP,
})


@dataclass
class RasterLayer:
    """Row-major grid; row 0 is the northernmost row, as in the file."""

    ncols: int
    nrows: int
    xllcorner: float
    yllcorner: float
    cellsize: float
    nodata: float
    values: np.ndarray  # shape (nrows, ncols), nodata cells hold the sentinel
    semantic: Semantic

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.nrows, self.ncols):
            raise GridError(
                f"value grid shape {self.values.shape} does not match "
                f"declared {self.nrows} rows x {self.ncols} cols")
        if self.cellsize <= 0:
            raise GridError(f"cellsize must be > 0, got {self.cellsize}")
        self._check_bounds()

    def _check_bounds(self):
        if self.semantic in _UNIT_INTERVAL_SEMANTICS:
            data = self.values[self.mask()]
            if data.size and (data.min() < 0 or data.max() > 1):
                bad = data[(data < 0) | (data > 1)][0]
                raise GridError(
                    f"{self.semantic.value} layer holds value {bad} outside [0, 1]")

    def mask(self) -> np.ndarray:
        """Boolean mask of valid (non-nodata) cells."""
        return self.values != self.nodata

    def extent(self) -> tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) of the outer grid edge."""
        return (self.xllcorner, self.yllcorner,
                self.xllcorner + self.ncols * self.cellsize,
                self.yllcorner + self.nrows * self.cellsize)

    def aligned_with(self, other: "RasterLayer") -> bool:
        return (self.ncols == other.ncols and self.nrows == other.nrows
                and self.xllcorner == other.xllcorner
                and self.yllcorner == other.yllcorner
                and self.cellsize == other.cellsize)


def parse_ascii_grid(source, semantic: Semantic) -> RasterLayer:
    """Read an ESRI ASCII grid and validate it against the declared semantic."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source) as fh:
            return parse_ascii_grid(fh, semantic)
    header: dict[str, float] = {}
    nodata = -9999.0
    tokens: list[str] = []
    for line in source:
        parts = line.split()
        if not parts:
            continue
        key = parts[0].lower()
        if not tokens and key in _HEADER_KEYS + ("nodata_value",):
            if len(parts) != 2:
                raise GridError(f"malformed header line: {line.strip()!r}")
            if key == "nodata_value":
                nodata = float(parts[1])
            else:
                header[key] = float(parts[1])
        else:
            tokens.extend(parts)
    missing = [k for k in _HEADER_KEYS if k not in header]
    if missing:
        raise GridError(f"missing header keys: {', '.join(missing)}")
    ncols, nrows = int(header["ncols"]), int(header["nrows"])
    if len(tokens) != ncols * nrows:
        raise GridError(
            f"expected {ncols * nrows} cell values, found {len(tokens)}")
    try:
        values = np.array([float(t) for t in tokens]).reshape(nrows, ncols)
    except ValueError as exc:
        raise GridError(f"non-numeric cell value: {exc}") from exc
    return RasterLayer(
        ncols=ncols, nrows=nrows,
        xllcorner=header["xllcorner"], yllcorner=header["yllcorner"],
        cellsize=header["cellsize"], nodata=nodata,
        values=values, semantic=semantic,
    )


def write_ascii_grid(layer: RasterLayer, sink) -> None:
    """Write an ESRI ASCII grid; cell values round-trip bit-exactly."""
    if isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__"):
        with open(sink, "w") as fh:
            write_ascii_grid(layer, fh)
            return
    sink.write(f"ncols {layer.ncols}\n")
    sink.write(f"nrows {layer.nrows}\n")
    sink.write(f"xllcorner {layer.xllcorner!r}\n")
    sink.write(f"yllcorner {layer.yllcorner!r}\n")
    sink.write(f"cellsize {layer.cellsize!r}\n")
    sink.write(f"NODATA_value {layer.nodata!r}\n")
    for row in layer.values:
        sink.write(" ".join(repr(v) for v in row.tolist()) + "\n")


def normalize_irradiance(raw: RasterLayer, clear_sky_max: float) -> RasterLayer:
    """Scale a raw irradiance grid (W/m2) into [0, 1].

    `clear_sky_max` is the unobstructed-sky reference and must be supplied
    explicitly; it is never inferred from the data.
    """
    if clear_sky_max <= 0:
        raise DomainError(f"clear-sky reference must be > 0, got {clear_sky_max}")
    mask = raw.mask()
    values = raw.values.copy()
    values[mask] = np.clip(values[mask] / clear_sky_max, 0.0, 1.0)
    return replace(raw, values=values, semantic=Semantic.IRRADIANCE_NORMALIZED)


def compute_ucp(albedo: RasterLayer, vegetation: RasterLayer,
                irradiance: RasterLayer, formula: str = "product",
                weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
                ) -> RasterLayer:
    """Cellwise Urban Cooling Potential from co-registered input layers.

    The default product form UCP = S * (1 - albedo) * (1 - vegetation)
    reproduces both anchors: 1 on sunlit zero-albedo bare pavement, 0 under
    full vegetation cover. The weighted-sum alternative uses `weights` for
    (irradiance, 1 - albedo, 1 - vegetation), normalized to sum to one.
    Nodata in any input propagates to the output.
    """
    for name, layer, semantic in (("albedo", albedo, Semantic.ALBEDO),
                                  ("vegetation", vegetation, Semantic.VEGETATION_FRACTION),
                                  ("irradiance", irradiance, Semantic.IRRADIANCE_NORMALIZED)):
        if layer.semantic is not semantic:
            raise GridError(f"{name} layer has semantic {layer.semantic.value}")
        if not layer.aligned_with(albedo):
            raise GridError(f"{name} layer is not co-registered with the albedo layer")
    mask = albedo.mask() & vegetation.mask() & irradiance.mask()
    s = irradiance.values
    if formula == "product":
        ucp = s * (1.0 - albedo.values) * (1.0 - vegetation.values)
    elif formula == "weighted_sum":
        w = np.array(weights, dtype=float)
        if w.min() < 0 or w.sum() <= 0:
            raise DomainError(f"weights must be non-negative with positive sum: {weights}")
        w = w / w.sum()
        ucp = w[0] * s + w[1] * (1.0 - albedo.values) + w[2] * (1.0 - vegetation.values)
    else:
        raise DomainError(f"unknown UCP formula {formula!r}")
    ucp = np.clip(ucp, 0.0, 1.0)
    nodata = albedo.nodata
    out = np.where(mask, ucp, nodata)
    return RasterLayer(
        ncols=albedo.ncols, nrows=albedo.nrows,
        xllcorner=albedo.xllcorner, yllcorner=albedo.yllcorner,
        cellsize=albedo.cellsize, nodata=nodata,
        values=out, semantic=Semantic.UCP,
    )


def sample_at(layer: RasterLayer, x: float, y: float) -> float | None:
    """Bilinear sample at a planar location.

    Interpolates between the four surrounding cell centers; when any of
    them is nodata, falls back to the nearest cell. Returns None if even
    that cell is nodata.
    """
    xmin, ymin, xmax, ymax = layer.extent()
    if not (xmin <= x <= xmax and ymin <= y <= ymax):
        raise DomainError(
            f"location ({x}, {y}) outside raster extent "
            f"[{xmin}, {xmax}] x [{ymin}, {ymax}]")
    # fractional cell-center coordinates; row 0 is the top (northern) row
    gc = (x - layer.xllcorner) / layer.cellsize - 0.5
    gr = (ymax - y) / layer.cellsize - 0.5
    gc = min(max(gc, 0.0), layer.ncols - 1.0)
    gr = min(max(gr, 0.0), layer.nrows - 1.0)
    c0, r0 = int(math.floor(gc)), int(math.floor(gr))
    c1, r1 = min(c0 + 1, layer.ncols - 1), min(r0 + 1, layer.nrows - 1)
    fc, fr = gc - c0, gr - r0
    corners = [layer.values[r0, c0], layer.values[r0, c1],
               layer.values[r1, c0], layer.values[r1, c1]]
    if any(v == layer.nodata for v in corners):
        nearest = layer.values[round(gr), round(gc)]
        return None if nearest == layer.nodata else float(nearest)
    top = corners[0] * (1 - fc) + corners[1] * fc
    bottom = corners[2] * (1 - fc) + corners[3] * fc
    return float(top * (1 - fr) + bottom * fr)


def export_heat_map(results, plan, ucp: RasterLayer | None = None) -> dict:
    """Build a GeoJSON FeatureCollection of per-point heat-stress results.

    One Point feature per traverse point with the UTCI offset, stress
    category, environment and phase; when a UCP raster is supplied each
    feature also carries the sampled UCP value. Key order and coordinate
    precision (6 decimals) are fixed so output files are byte-deterministic.
    """
    if not results:
        raise DomainError("no point results to export")
    features = []
    for result in sorted(results, key=lambda r: r.point_id):
        point = plan.point(result.point_id)
        properties = {
            "point_id": result.point_id,
            "phase": plan.phase.value,
            "environment": point.environment.value,
            "utci_mobile": round(result.utci_mobile, 3),
            "utci_ref": round(result.utci_ref, 3),
            "offset_c": round(result.offset.value, 3),
            "stress_category": heat_stress_category(result.utci_mobile).value,
        }
        if ucp is not None:
            value = sample_at(ucp, *point.location)
            if value is not None:
                properties["ucp"] = round(value, 4)
        features.append({
            "type": "Feature",
            "geometry": {
                "type": "Point",
                "coordinates": [round(point.location[0], 6),
                                round(point.location[1], 6)],
            },
            "properties": properties,
        })
    return {"type": "FeatureCollection", "features": features}


def geojson_dumps(collection: dict) -> str:
    """Serialize GeoJSON with stable formatting for golden-file comparison."""
    return json.dumps(collection, indent=2, ensure_ascii=True) + "\n"
