"""Rotationally symmetric metrics, radial potentials and their curvature calculus.

A metric is stored in one of two gauges:

* arc length, ``drho^2 + w(rho)^2 g_round``;
* areal radius, ``dr^2 / V(r) + r^2 g_round``.

Internally everything is reduced to the *frame form*: the areal radius ``w`` of
the level spheres together with its first two derivatives along the unit
radial field ``e_r``.  Ricci and Hessian components are returned in the
orthonormal frame ``(e_r, e_1, ..., e_{n-1})``; by symmetry every tangential
direction carries the same value.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateBoundaryError,
    GridMismatchError,
    InconsistentMetricError,
    MalformedMetricError,
)

MIN_GRID = 64
DEFAULT_GRID = 2048
CURVATURE_RTOL = 1e-8
DEGENERATE_GRADIENT = 1e-10


class SpaceForm(enum.Enum):
    EUCLIDEAN = "euclidean"
    SPHERICAL = "spherical"
    HYPERBOLIC = "hyperbolic"

    @property
    def k(self) -> int:
        return {"euclidean": 0, "spherical": 1, "hyperbolic": -1}[self.value]

    def scalar_curvature(self, n: int) -> float:
        return float(n * (n - 1) * self.k)


class Gauge(enum.Enum):
    ARC_LENGTH = "arc_length"
    AREAL_RADIUS = "areal_radius"


def sphere_area(n: int) -> float:
    """Measure of the unit round (n-1)-sphere in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _as_array(name, values, size=None):
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise MalformedMetricError(f"{name} must be one-dimensional")
    if size is not None and arr.shape[0] != size:
        raise MalformedMetricError(f"{name} has length {arr.shape[0]}, expected {size}")
    if not np.all(np.isfinite(arr)):
        raise MalformedMetricError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class WarpedMetric:
    """A rotationally symmetric metric sampled on a radial grid.

    Use :meth:`arc_length` or :meth:`areal_radius` rather than the raw
    constructor.  ``w``, ``dw`` and ``ddw`` are the areal radius of the level
    spheres and its derivatives along the unit radial field, ``kt`` the
    sectional curvature of planes tangent to the spheres, ``(1 - dw^2) / w^2``,
    and ``lapse``/``dlapse`` the coordinate data ``(V, V')`` of the areal gauge
    (``1`` and ``0`` in arc-length gauge).
    """

    n: int
    gauge: Gauge
    grid: np.ndarray
    w: np.ndarray
    dw: np.ndarray
    ddw: np.ndarray
    kt: np.ndarray
    lapse: np.ndarray
    dlapse: np.ndarray
    R: float
    curvature_rtol: float = CURVATURE_RTOL

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise MalformedMetricError(f"dimension must be an integer >= 3, got {self.n}")
        grid = self.grid
        if grid.shape[0] < MIN_GRID:
            raise MalformedMetricError(f"grid needs at least {MIN_GRID} points")
        if np.any(np.diff(grid) <= 0):
            raise MalformedMetricError("grid must be strictly increasing")
        if np.any(self.w < 0) or np.any(self.w[1:-1] <= 0):
            raise MalformedMetricError("warping function must be positive in the interior")
        if np.any(self.lapse <= 0):
            raise MalformedMetricError("lapse must be positive on the grid")
        if not math.isfinite(self.R):
            raise MalformedMetricError("scalar curvature must be finite")
        check_constant_scalar_curvature(self, self.curvature_rtol)

    @classmethod
    def arc_length(cls, n, grid, w, dw, ddw, R, kt=None, curvature_rtol=CURVATURE_RTOL):
        """Metric ``drho^2 + w^2 g_round`` from exact warping data.

        ``kt`` may be passed when ``(1 - w'^2)/w^2`` is known in closed form;
        this avoids the cancellation in ``1 - w'^2`` near a regular centre.
        """
        grid = _as_array("grid", grid)
        size = grid.shape[0]
        w = _as_array("w", w, size)
        dw = _as_array("w'", dw, size)
        ddw = _as_array("w''", ddw, size)
        if kt is None:
            with np.errstate(divide="ignore", invalid="ignore"):
                kt = np.where(w > 0, (1.0 - dw**2) / np.where(w > 0, w, 1.0) ** 2, np.nan)
            kt = np.nan_to_num(kt, nan=0.0)
        kt = _as_array("tangential curvature", kt, size)
        ones = _as_array("lapse", np.ones(size))
        zeros = _as_array("lapse'", np.zeros(size))
        return cls(int(n), Gauge.ARC_LENGTH, grid, w, dw, ddw, kt, ones, zeros,
                   float(R), curvature_rtol)

    @classmethod
    def areal_radius(cls, n, grid, V, dV, R, curvature_rtol=CURVATURE_RTOL):
        """Metric ``dr^2/V + r^2 g_round`` from lapse data ``V(r)``, ``V'(r)``."""
        r = _as_array("grid", grid)
        size = r.shape[0]
        V = _as_array("V", V, size)
        dV = _as_array("V'", dV, size)
        if np.any(V <= 0):
            raise MalformedMetricError("lapse must be positive on the grid")
        if np.any(r <= 0):
            raise MalformedMetricError("areal radius must be positive")
        dw = _as_array("w'", np.sqrt(V), size)
        ddw = _as_array("w''", 0.5 * dV, size)
        kt = _as_array("tangential curvature", (1.0 - V) / r**2, size)
        return cls(int(n), Gauge.AREAL_RADIUS, r, r, dw, ddw, kt, V, dV,
                   float(R), curvature_rtol)

    @property
    def size(self) -> int:
        return self.grid.shape[0]

    @property
    def regular(self) -> np.ndarray:
        """Mask of grid points where the level sphere is non-degenerate."""
        return self.w > 0


class RadialProfile(NamedTuple):
    """Potential ``f`` with first and second derivatives in the grid coordinate."""

    grid: np.ndarray
    f: np.ndarray
    df: np.ndarray
    ddf: np.ndarray

    @classmethod
    def from_arrays(cls, grid, f, df, ddf):
        grid = np.asarray(grid, dtype=float)
        arrays = [np.asarray(a, dtype=float) for a in (f, df, ddf)]
        for a in arrays:
            if a.shape != grid.shape:
                raise GridMismatchError("profile arrays must match the grid")
            if not np.all(np.isfinite(a)):
                raise MalformedMetricError("profile contains non-finite values")
        if not np.any(arrays[0] != 0):
            raise MalformedMetricError("potential must not vanish identically")
        return cls(grid, *arrays)


class FrameSample(NamedTuple):
    """Metric and potential at arbitrary radial coordinates (arc-length frame form)."""

    w: np.ndarray
    dw: np.ndarray
    ddw: np.ndarray
    kt: np.ndarray
    f: np.ndarray
    df: np.ndarray
    ddf: np.ndarray


def _check_grid(metric: WarpedMetric, profile: RadialProfile):
    if profile.grid.shape != metric.grid.shape or not np.array_equal(profile.grid, metric.grid):
        raise GridMismatchError("profile is not sampled on the metric grid")


def _check_index(metric: WarpedMetric, index: int) -> int:
    index = int(index)
    if not -metric.size <= index < metric.size:
        raise IndexError(f"grid index {index} out of range")
    if metric.w[index] <= 0:
        raise MalformedMetricError(f"grid index {index} sits on a degenerate sphere (w = 0)")
    return index


# -- curvature -------------------------------------------------------------

def sectional_arrays(metric: WarpedMetric):
    """Radial and tangential sectional curvatures; NaN where ``w = 0``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        kr = np.where(metric.regular, -metric.ddw / metric.w, np.nan)
    kt = np.where(metric.regular, metric.kt, np.nan)
    return kr, kt


def ricci_arrays(metric: WarpedMetric):
    kr, kt = sectional_arrays(metric)
    n = metric.n
    return (n - 1) * kr, kr + (n - 2) * kt


def scalar_curvature_array(metric: WarpedMetric) -> np.ndarray:
    ric_r, ric_t = ricci_arrays(metric)
    return ric_r + (metric.n - 1) * ric_t


def check_constant_scalar_curvature(metric: WarpedMetric, rtol: float = CURVATURE_RTOL) -> float:
    """Return the largest deviation of pointwise R from ``metric.R``.

    Raises :class:`InconsistentMetricError` when it exceeds ``rtol`` relative
    to the curvature scale of the metric.
    """
    ric_r, ric_t = ricci_arrays(metric)
    R = ric_r + (metric.n - 1) * ric_t
    mask = metric.regular
    if not np.all(np.isfinite(R[mask])):
        raise MalformedMetricError("curvature is not finite on the grid")
    deviation = float(np.max(np.abs(R[mask] - metric.R)))
    scale = max(abs(metric.R), float(np.max(np.abs(ric_r[mask]) + (metric.n - 1) * np.abs(ric_t[mask]))), 1e-300)
    if deviation > rtol * scale:
        raise InconsistentMetricError(
            f"scalar curvature varies by {deviation:.3e} (scale {scale:.3e}); expected constant {metric.R}")
    return deviation


def ricci_components(metric: WarpedMetric, index: int):
    """Ricci curvature on ``e_r`` and on one unit tangential vector at a grid point."""
    i = _check_index(metric, index)
    data = (metric.w[i], metric.dw[i], metric.ddw[i], metric.kt[i])
    if not all(math.isfinite(v) for v in data):
        raise MalformedMetricError("non-finite derivative data")
    kr = -metric.ddw[i] / metric.w[i]
    n = metric.n
    return float((n - 1) * kr), float(kr + (n - 2) * metric.kt[i])


def scalar_curvature(metric: WarpedMetric, index: int) -> float:
    ric_r, ric_t = ricci_components(metric, index)
    return ric_r + (metric.n - 1) * ric_t


# -- Hessian and Laplacian ---------------------------------------------------

def unit_derivatives(metric: WarpedMetric, profile: RadialProfile):
    """First and second derivatives of ``f`` along the unit radial field."""
    _check_grid(metric, profile)
    if metric.gauge is Gauge.ARC_LENGTH:
        return profile.df, profile.ddf
    s = np.sqrt(metric.lapse)
    return s * profile.df, metric.lapse * profile.ddf + 0.5 * metric.dlapse * profile.df


def hessian_arrays(metric: WarpedMetric, profile: RadialProfile):
    """Frame Hessian components and Laplacian of a radial function (NaN where ``w = 0``)."""
    fp, fpp = unit_derivatives(metric, profile)
    with np.errstate(divide="ignore", invalid="ignore"):
        ht = np.where(metric.regular, metric.dw * fp / metric.w, np.nan)
    hr = np.array(fpp, dtype=float)
    return hr, ht, hr + (metric.n - 1) * ht


def hessian_laplacian(metric: WarpedMetric, profile: RadialProfile, index: int):
    _check_grid(metric, profile)
    i = _check_index(metric, index)
    hr, ht, lap = hessian_arrays(metric, profile)
    return float(hr[i]), float(ht[i]), float(lap[i])


def traceless_ricci(metric: WarpedMetric):
    """Radial and tangential components of ``Ric - (R/n) g``."""
    ric_r, ric_t = ricci_arrays(metric)
    return ric_r - metric.R / metric.n, ric_t - metric.R / metric.n


def traceless_hessian(metric: WarpedMetric, profile: RadialProfile):
    hr, ht, lap = hessian_arrays(metric, profile)
    return hr - lap / metric.n, ht - lap / metric.n


def finite_difference_metric(n, grid, w, R, kt_exact=None) -> WarpedMetric:
    """Arc-length metric whose derivatives come from second-order finite differences.

    This is a reference route only: the construction modules always supply
    exact derivative data.
    """
    grid = np.asarray(grid, dtype=float)
    w = np.asarray(w, dtype=float)
    dw = np.gradient(w, grid, edge_order=2)
    ddw = np.gradient(dw, grid, edge_order=2)
    return WarpedMetric.arc_length(n, grid, w, dw, ddw, R, kt=kt_exact, curvature_rtol=np.inf)


# -- critical solutions ------------------------------------------------------

@dataclass(frozen=True)
class BoundaryComponent:
    coordinate: float
    index: int
    radius: float
    grad_norm: float
    H: float
    area: float
    intrinsic_R: float
    euler_char: int
    ric_normal: float


@dataclass(frozen=True, eq=False)
class CriticalSolution:
    """A metric together with a potential solving the critical-metric system.

    ``field`` evaluates metric and potential off the grid (closed form or dense
    ODE output) and is what level-set and root-finding code uses.
    ``components`` lists the connected radial intervals of the domain with
    ``max_locus`` removed.
    """

    kind: str
    params: dict
    metric: WarpedMetric
    potential: RadialProfile
    f_max: float
    max_locus: tuple
    max_type: str
    boundary_indices: tuple
    components: tuple
    field: Callable[[np.ndarray], FrameSample] = field(repr=False)
    closed_form: bool = True
    boundary_atol: float = 0.0

    def __post_init__(self):
        _check_grid(self.metric, self.potential)
        if self.max_type not in ("point", "sphere"):
            raise ValueError(f"unknown maximum type {self.max_type!r}")
        f = self.potential.f
        scale = max(abs(self.f_max), 1e-300)
        if np.any(f < -1e-12 * scale):
            raise MalformedMetricError("potential must be nonnegative")
        for i in self.boundary_indices:
            if abs(f[i]) > self.boundary_atol:
                raise MalformedMetricError(f"potential does not vanish at boundary index {i}")
        interior = np.ones(f.shape, dtype=bool)
        interior[list(self.boundary_indices)] = False
        if np.any(f[interior] == 0):
            raise MalformedMetricError("potential vanishes away from the declared boundary")
        coords = [float(self.metric.grid[i]) for i in self.boundary_indices]
        for a, b in self.components:
            if not any(min(a, b) <= c <= max(a, b) for c in coords):
                raise MalformedMetricError(f"component ({a}, {b}) does not reach the boundary")

    @property
    def n(self) -> int:
        return self.metric.n

    @property
    def R(self) -> float:
        return self.metric.R

    @property
    def boundary_coordinates(self):
        return tuple(float(self.metric.grid[i]) for i in self.boundary_indices)

    @cached_property
    def boundary(self):
        return tuple(boundary_data(self))

    @cached_property
    def frame(self):
        """Grid arrays ``(fp, fpp)`` of unit-radial derivatives of the potential."""
        return unit_derivatives(self.metric, self.potential)

    def component_boundary(self, component) -> list:
        """Boundary components lying in the closure of a component of ``M \\ MAX(f)``."""
        a, b = component
        lo, hi = min(a, b), max(a, b)
        return [bc for bc in self.boundary if lo <= bc.coordinate <= hi]

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "parameters": dict(self.params),
            "R": self.R,
            "f_max": self.f_max,
            "max_type": self.max_type,
            "max_locus": list(self.max_locus),
            "boundary": [{"coordinate": b.coordinate, "radius": b.radius,
                          "H": b.H, "area": b.area} for b in self.boundary],
        }


def boundary_data(solution: CriticalSolution) -> list:
    metric = solution.metric
    fp, _ = unit_derivatives(metric, solution.potential)
    n = metric.n
    omega = sphere_area(n)
    out = []
    for i in solution.boundary_indices:
        grad = abs(float(fp[i]))
        if grad < DEGENERATE_GRADIENT:
            raise DegenerateBoundaryError(f"|grad f| = {grad:.3e} at boundary index {i}")
        w = float(metric.w[i])
        ric_r, _ = ricci_components(metric, i)
        out.append(BoundaryComponent(
            coordinate=float(metric.grid[i]),
            index=int(i),
            radius=w,
            grad_norm=grad,
            H=1.0 / grad,
            area=omega * w ** (n - 1),
            intrinsic_R=(n - 1) * (n - 2) / w**2,
            euler_char=1 + (-1) ** (n - 1),
            ric_normal=ric_r,
        ))
    return out
