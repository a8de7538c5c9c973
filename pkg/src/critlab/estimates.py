"""Boundary mean-curvature and area estimates, with their equality cases."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolationError
from .geometry import CriticalSolution, sphere_area
from .identities import default_tol, einstein_defect, integrate


@dataclass(frozen=True)
class EstimateResult:
    name: str
    paper_anchor: str
    bound_value: float
    attained_value: float
    margin: float
    equality: bool
    hypothesis_ok: bool
    tol: float
    status: str
    detail: str = ""

    def __post_init__(self):
        if self.equality and not self.hypothesis_ok:
            raise ValueError("equality reported for an estimate whose hypothesis fails")

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def asserted_check(self) -> bool:
        return self.status in ("pass", "fail")


def _upper(name, anchor, bound, attained, tol, hypothesis_ok=True, detail=""):
    """Result for ``attained <= bound`` with relative tolerance ``tol``."""
    margin = bound - attained
    scale = max(abs(bound), abs(attained), 1e-300)
    equality = hypothesis_ok and abs(margin) <= tol * scale
    if hypothesis_ok:
        status = "pass" if attained <= bound + tol * scale else "fail"
    else:
        status = "hypothesis_failed"
    return EstimateResult(name, anchor, float(bound), float(attained), float(margin),
                          bool(equality), bool(hypothesis_ok), float(tol), status, detail)


def _tol(solution, tol):
    return default_tol(solution) if tol is None else float(tol)


def critical_mean_curvature(solution: CriticalSolution) -> float:
    """``sqrt(n(n-1) / (R f_max^2 + 2n f_max))``, the boundary mean curvature of a geodesic ball."""
    n, R, fm = solution.n, solution.R, solution.f_max
    if fm <= 0:
        raise InvariantViolationError("f_max must be positive")
    denom = R * fm**2 + 2 * n * fm
    if denom <= 0:
        raise InvariantViolationError(f"R f_max^2 + 2n f_max = {denom} is not positive")
    return math.sqrt(n * (n - 1) / denom)


def mean_curvature_bound(solution: CriticalSolution, tol=None) -> EstimateResult:
    bound = critical_mean_curvature(solution)
    attained = min(bc.H for bc in solution.boundary)
    return _upper("mean_curvature_bound", "sharp mean-curvature bound", bound, attained,
                  _tol(solution, tol), detail=f"{len(solution.boundary)} boundary component(s)")


def localized_mean_curvature_bound(solution: CriticalSolution, component, tol=None) -> EstimateResult:
    """Same bound restricted to the boundary of one component of ``M minus MAX(f)``."""
    bound = critical_mean_curvature(solution)
    attained = min(bc.H for bc in solution.component_boundary(component))
    return _upper("localized_mean_curvature_bound", "localized mean-curvature bound",
                  bound, attained, _tol(solution, tol), detail=f"component {_fmt(component)}")


def potential_upper_bound(solution: CriticalSolution, tol=None) -> EstimateResult:
    """For negative scalar curvature ``f <= -n/R``; vacuous otherwise."""
    n, R = solution.n, solution.R
    if R >= 0:
        return EstimateResult("potential_upper_bound", "f <= -n/R for negative scalar curvature",
                              math.inf, solution.f_max, math.inf, False, False,
                              _tol(solution, tol), "informational", "R >= 0")
    return _upper("potential_upper_bound", "f <= -n/R for negative scalar curvature",
                  -n / R, solution.f_max, _tol(solution, tol))


def solution_volume(solution: CriticalSolution):
    """``(volume, quadrature volume)``; the first is closed form when one exists."""
    quad = integrate(solution, np.ones_like(solution.potential.f))
    if solution.kind == "euclidean_ball":
        n, r0 = solution.n, solution.params["r0"]
        return sphere_area(n) * r0**n / n, quad
    return quad, quad


def area_volume_bound(solution: CriticalSolution, tol=None) -> EstimateResult:
    """Scalar-flat, connected boundary: ``area / Vol <= sqrt(n^2 / (2(n-1) f_max))``."""
    n, fm = solution.n, solution.f_max
    hypothesis = solution.R == 0 and len(solution.boundary) == 1
    bound = math.sqrt(n**2 / (2 * (n - 1) * fm))
    vol, quad = solution_volume(solution)
    area = sum(bc.area for bc in solution.boundary)
    detail = f"volume {vol!r}, quadrature volume {quad!r}"
    if not hypothesis:
        detail += "; needs R = 0 and connected boundary"
    return _upper("area_volume_bound", "area-volume bound for scalar-flat metrics",
                  bound, area / vol, _tol(solution, tol), hypothesis, detail)


def ball_exclusion(n: int, r: float, f_max: float) -> bool:
    """True when a boundary round sphere of radius ``r`` rules out a Euclidean ball."""
    if r <= 0 or f_max <= 0:
        raise ValueError("radius and f_max must be positive")
    return r > math.sqrt(2 * (n - 1) * f_max)


def boundary_area_estimate(solution: CriticalSolution, tol=None) -> list:
    """Area of the boundary against the total scalar curvature of the boundary.

    Asserted only for connected boundary (and ``H^2 > -(n-1)R/n`` when
    ``R < 0``); for several components every component is reported with
    ``hypothesis_ok = False``.  In dimension three the Gauss-Bonnet form
    and the resulting ``4 pi / (R/6 + H^2/4)`` bound are reported too.
    """
    n, R = solution.n, solution.R
    tol = _tol(solution, tol)
    connected = len(solution.boundary) == 1
    out = []
    for k, bc in enumerate(solution.boundary):
        denom = (n - 2) * R / n + (n - 2) * bc.H**2 / (n - 1)
        total_scalar = bc.intrinsic_R * bc.area
        hypothesis = connected and denom > 0
        bound = total_scalar / denom if denom > 0 else math.inf
        detail = f"denominator {denom!r}, boundary scalar integral {total_scalar!r}"
        out.append(_upper(f"boundary_area_estimate[{k}]", "boundary area estimate",
                          bound, bc.area, tol, hypothesis, detail))
        if n == 3:
            gb = 4 * math.pi * bc.euler_char
            out.append(_equal(f"gauss_bonnet[{k}]", "Gauss-Bonnet on the boundary surface",
                              gb, total_scalar, tol))
            d3 = R / 6 + bc.H**2 / 4
            bound3 = 4 * math.pi / d3 if d3 > 0 else math.inf
            out.append(_upper(f"area_bound_3d[{k}]", "three-dimensional boundary area bound",
                              bound3, bc.area, tol, connected and d3 > 0))
    return out


def _equal(name, anchor, expected, attained, tol):
    margin = expected - attained
    ok = abs(margin) <= tol * max(abs(expected), abs(attained), 1e-300)
    return EstimateResult(name, anchor, float(expected), float(attained), float(margin),
                          bool(ok), True, float(tol), "pass" if ok else "fail")


def localized_boundary_estimate(solution: CriticalSolution, component, tol=None) -> EstimateResult:
    """``int_{dE} |grad f| (R^dE - (n-2)R/n - (n-2)H^2/(n-1)) >= 0`` on one component."""
    n, R = solution.n, solution.R
    tol = _tol(solution, tol)
    total, scale = 0.0, 0.0
    for bc in solution.component_boundary(component):
        weight = bc.grad_norm * bc.area
        total += weight * (bc.intrinsic_R - (n - 2) * R / n - (n - 2) * bc.H**2 / (n - 1))
        scale += weight * (bc.intrinsic_R + (n - 2) * abs(R) / n + (n - 2) * bc.H**2 / (n - 1))
    equality = abs(total) <= tol * scale
    status = "pass" if total >= -tol * scale else "fail"
    return EstimateResult("localized_boundary_estimate", "localized boundary area estimate",
                          0.0, float(total), float(total), bool(equality), True, tol, status,
                          f"component {_fmt(component)}")


def _component_mask(solution: CriticalSolution, component) -> np.ndarray:
    a, b = min(component), max(component)
    x = solution.metric.grid
    return (x >= a) & (x <= b)


def gradient_bound_profile(solution: CriticalSolution):
    """``(|grad f|^2, h(f))`` on the grid with ``h(t) = (R(f_max^2 - t^2) + 2n(f_max - t)) / (n(n-1))``."""
    n, R, fm = solution.n, solution.R, solution.f_max
    f = solution.potential.f
    fp, _ = solution.frame
    return fp**2, (R * (fm**2 - f**2) + 2 * n * (fm - f)) / (n * (n - 1))


def gradient_hypothesis(solution: CriticalSolution, component, tol=None) -> bool:
    """Whether ``H^2 >= n(n-1)/(R f_max^2 + 2n f_max)`` on every boundary sphere of the component."""
    tol = _tol(solution, tol)
    crit = critical_mean_curvature(solution) ** 2
    return all(bc.H**2 >= crit * (1 - tol) for bc in solution.component_boundary(component))


def gradient_bound_check(solution: CriticalSolution, component, tol=None) -> EstimateResult:
    """Pointwise ``|grad f|^2 <= h(f)`` on a component, under the boundary mean-curvature hypothesis.

    A hypothesis that holds on a non-Einstein solution whose maximum set is a
    sphere contradicts the localized rigidity statement and is reported as a
    failure.
    """
    tol = _tol(solution, tol)
    mask = _component_mask(solution, component)
    grad2, h = gradient_bound_profile(solution)
    excess = grad2[mask] - h[mask]
    violation = float(np.max(excess))
    scale = max(float(np.max(np.abs(h[mask]))), 1e-300)
    hypothesis = gradient_hypothesis(solution, component, tol)
    equality = hypothesis and float(np.max(np.abs(excess))) <= tol * scale
    detail = f"component {_fmt(component)}, max violation {violation!r}"
    if hypothesis and solution.max_type == "sphere" and einstein_defect(solution) > 1e-8:
        status = "fail"
        detail += "; hypothesis holds on a non-Einstein solution with a spherical MAX(f)"
    elif hypothesis:
        status = "pass" if violation <= tol * scale else "fail"
    else:
        status = "hypothesis_failed"
    return EstimateResult("gradient_bound", "gradient estimate on a component of M minus MAX(f)",
                          0.0, violation, -violation, bool(equality), bool(hypothesis), tol, status, detail)


def _fmt(component) -> str:
    return "({!r}, {!r})".format(*component)
