"""Pointwise and integral identities satisfied by every critical metric.

Pointwise checks that divide by ``f`` are restricted to ``{f >= f_floor}``.
Divergences of radial vector fields are taken in flux form,
``w^{1-n} d/drho (w^{n-1} X)``, with one second-order centred difference of
the flux; every other quantity comes from exact derivative data.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .errors import DomainError
from .geometry import (
    CriticalSolution,
    Gauge,
    sphere_area,
    traceless_hessian,
    traceless_ricci,
    hessian_arrays,
    ricci_arrays,
)

STATUSES = ("pass", "fail", "hypothesis_failed", "informational", "inconclusive")
DEFAULT_FLOOR_FRACTION = 0.02


@dataclass(frozen=True)
class CheckReport:
    name: str
    paper_anchor: str
    lhs: float
    rhs: float
    residual: float
    tol: float
    status: str
    detail: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")

    @classmethod
    def asserted(cls, name, anchor, lhs, rhs, residual, tol, detail=""):
        status = "pass" if residual <= tol else "fail"
        return cls(name, anchor, float(lhs), float(rhs), float(residual), float(tol), status, detail)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def asserted_check(self) -> bool:
        return self.status in ("pass", "fail")


@dataclass(frozen=True, eq=False)
class PhiProfile:
    grid: np.ndarray
    phi: np.ndarray
    phi_at_max: float
    phi_at_max_expected: float
    elliptic: np.ndarray = field(repr=False)
    hessian_term: np.ndarray = field(repr=False)
    min_elliptic: float = 0.0

    @property
    def spread(self) -> float:
        return float(np.max(self.phi) - np.min(self.phi))


def default_tol(solution: CriticalSolution) -> float:
    return 1e-9 if solution.closed_form else 1e-6


def _floor(solution: CriticalSolution, f_floor):
    return DEFAULT_FLOOR_FRACTION * solution.f_max if f_floor is None else float(f_floor)


def _region(solution: CriticalSolution, f_floor) -> np.ndarray:
    floor = _floor(solution, f_floor)
    if floor <= 0:
        raise DomainError("f_floor must be positive")
    mask = (solution.potential.f >= floor) & solution.metric.regular
    if not np.any(mask):
        raise DomainError(f"no grid point with f >= {floor}")
    return mask


def radial_divergence(solution: CriticalSolution, X: np.ndarray) -> np.ndarray:
    """Divergence of the radial field ``X e_r`` by a centred difference of its flux.

    ``X`` may be NaN where it is undefined (e.g. on ``f = 0``); the result is
    NaN there and at the neighbouring points.  At a regular centre the flux
    vanishes.
    """
    metric = solution.metric
    w = metric.w
    flux = np.where(w > 0, w ** (metric.n - 1) * X, 0.0)
    dflux = np.gradient(flux, metric.grid, edge_order=2) * np.sqrt(metric.lapse)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(w > 0, dflux / w ** (metric.n - 1), np.nan)


def face_divergence(solution: CriticalSolution, component) -> np.ndarray:
    """Finite-volume divergence of a radial field known in closed form along the solution.

    ``component(sample)`` maps a :class:`FrameSample` to the radial component
    of the field.  The flux ``w^{n-1} X`` is evaluated exactly on the cell
    faces halfway between grid points and differenced across each cell.
    Arc-length gauge only; endpoints are NaN.
    """
    metric = solution.metric
    if metric.gauge is not Gauge.ARC_LENGTH:
        raise ValueError("face divergence needs an arc-length solution")
    x = metric.grid
    faces = 0.5 * (x[1:] + x[:-1])
    s = solution.field(faces)
    with np.errstate(divide="ignore", invalid="ignore"):
        flux = s.w ** (metric.n - 1) * component(s)
    out = np.full(x.shape, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[1:-1] = (flux[1:] - flux[:-1]) / (faces[1:] - faces[:-1]) / metric.w[1:-1] ** (metric.n - 1)
    return out


def _unit_gradient(solution: CriticalSolution, values: np.ndarray) -> np.ndarray:
    metric = solution.metric
    return np.gradient(values, metric.grid, edge_order=2) * np.sqrt(metric.lapse)


def traceless_identity_residual(solution: CriticalSolution) -> float:
    """Largest componentwise gap in ``f Ric_0 = Hess_0 f`` (traceless parts)."""
    rr, rt = traceless_ricci(solution.metric)
    hr, ht = traceless_hessian(solution.metric, solution.potential)
    f = solution.potential.f
    mask = solution.metric.regular
    gap = np.maximum(np.abs(f * rr - hr), np.abs(f * rt - ht))
    return float(np.max(gap[mask]))


def robinson_shen_terms(solution: CriticalSolution, f_floor=None):
    """Both sides of the Robinson-Shen identity on ``{f >= f_floor}``.

    Returns ``(coordinates, divergence side, 2|Hess_0 f|^2 / f side)``.
    """
    mask = _region(solution, f_floor)
    n = solution.n

    def field_x(s):
        lap = s.ddf + (n - 1) * s.dw * s.df / s.w
        # (1/f) grad|grad f|^2 - (2 lap f / (n f)) grad f, radial part
        return 2.0 * s.df * (s.ddf - lap / n) / s.f

    f = solution.potential.f
    hr0, ht0 = traceless_hessian(solution.metric, solution.potential)
    with np.errstate(divide="ignore", invalid="ignore"):
        rhs = 2.0 * (hr0**2 + (n - 1) * ht0**2) / f
    lhs = face_divergence(solution, field_x)
    return solution.metric.grid[mask], lhs[mask], rhs[mask]


def robinson_shen_residual(solution: CriticalSolution, f_floor=None, scaled: bool = False) -> float:
    """Largest pointwise gap; ``scaled`` divides by ``max(1, max |rhs|)``."""
    _, lhs, rhs = robinson_shen_terms(solution, f_floor)
    gap = float(np.max(np.abs(lhs - rhs)))
    return gap / max(1.0, float(np.max(np.abs(rhs)))) if scaled else gap


def _phi_from_sample(sample, n, R):
    """Phi at one point from exact data, taking the limit at a regular centre."""
    w, dw, df, ddf = (float(v) for v in (sample.w, sample.dw, sample.df, sample.ddf))
    lap = n * ddf if w == 0 else ddf + (n - 1) * dw * df / w
    if R == 0:
        return df**2 + 2.0 * float(sample.f) / (n - 1)
    return df**2 + (n - 1) * lap**2 / (n * R)


def phi_expected_on_max(n: int, R: float, f_max: float) -> float:
    if R == 0:
        return 2.0 * f_max / (n - 1)
    return (n - 1) / (n * R) * ((R * f_max + n) / (n - 1)) ** 2


def phi_profile(solution: CriticalSolution, f_floor=None) -> PhiProfile:
    """The function Phi and its degenerate elliptic operator.

    ``elliptic`` holds ``lap Phi - <grad f, grad Phi>/f`` on ``{f >= f_floor}``
    (NaN elsewhere); on a critical metric it equals ``2|Hess_0 f|^2 >= 0``.
    """
    n, R = solution.n, solution.R
    f = solution.potential.f
    fp, _ = solution.frame
    _, _, lap = hessian_arrays(solution.metric, solution.potential)
    if R == 0:
        phi = fp**2 + 2.0 * f / (n - 1)
    else:
        phi = fp**2 + (n - 1) * lap**2 / (n * R)
    centre = ~solution.metric.regular
    if np.any(centre):
        for i in np.nonzero(centre)[0]:
            phi[i] = _phi_from_sample(solution.field(solution.metric.grid[i]), n, R)

    mask = _region(solution, f_floor)
    dphi = _unit_gradient(solution, phi)
    with np.errstate(divide="ignore", invalid="ignore"):
        elliptic = radial_divergence(solution, dphi) - np.where(f > 0, fp * dphi / f, np.nan)
    elliptic = np.where(mask, elliptic, np.nan)
    hr0, ht0 = traceless_hessian(solution.metric, solution.potential)
    hess_term = np.where(mask, 2.0 * (hr0**2 + (n - 1) * ht0**2), np.nan)

    star = solution.field(solution.max_locus[0])
    return PhiProfile(
        grid=solution.metric.grid,
        phi=phi,
        phi_at_max=_phi_from_sample(star, n, R),
        phi_at_max_expected=phi_expected_on_max(n, R, solution.f_max),
        elliptic=elliptic,
        hessian_term=hess_term,
        min_elliptic=float(np.nanmin(elliptic)),
    )


def maximum_principle_gap(solution: CriticalSolution, profile: PhiProfile) -> float:
    """``max_interior Phi - max_boundary Phi``; nonpositive when Phi obeys the maximum principle."""
    interior = np.ones(profile.phi.shape, dtype=bool)
    interior[list(solution.boundary_indices)] = False
    boundary_max = max(profile.phi[i] for i in solution.boundary_indices)
    return float(np.max(profile.phi[interior]) - boundary_max)


def gauss_equation_check(solution: CriticalSolution, tol: float = 1e-7) -> list:
    n, R = solution.n, solution.R
    reports = []
    for k, bc in enumerate(solution.boundary):
        lhs = 2.0 * bc.ric_normal + bc.intrinsic_R
        rhs = R + (n - 2) * bc.H**2 / (n - 1)
        reports.append(CheckReport.asserted(
            f"gauss_equation[{k}]", "Gauss equation on the umbilical boundary",
            lhs, rhs, abs(lhs - rhs), tol, detail=f"areal radius {bc.radius!r}"))
    return reports


def _volume_weight(solution: CriticalSolution) -> np.ndarray:
    metric = solution.metric
    return sphere_area(metric.n) * metric.w ** (metric.n - 1) / np.sqrt(metric.lapse)


def integrate(solution: CriticalSolution, density: np.ndarray) -> float:
    """Volume integral of a radial density (composite Simpson in the grid coordinate)."""
    integrand = np.where(solution.metric.w > 0, density * _volume_weight(solution), 0.0)
    return float(simpson(integrand, x=solution.metric.grid))


def _outward_signs(solution: CriticalSolution):
    last = solution.metric.size - 1
    return [(i, 1.0 if i == last else -1.0) for i in solution.boundary_indices]


def divergence_balance(solution: CriticalSolution, tol=None) -> CheckReport:
    """Volume integral of ``f|Ric_0|^2`` against the boundary flux of ``Ric(grad f) - (R/n) grad f``."""
    tol = default_tol(solution) * 10 if tol is None else tol
    n = solution.n
    rr, rt = traceless_ricci(solution.metric)
    f = solution.potential.f
    fp, _ = solution.frame
    lhs = integrate(solution, f * (rr**2 + (n - 1) * rt**2))
    omega = sphere_area(n)
    rhs = 0.0
    for i, sign in _outward_signs(solution):
        rhs += sign * rr[i] * fp[i] * omega * solution.metric.w[i] ** (n - 1)
    residual = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-14)
    return CheckReport.asserted("divergence_balance", "integral balance of f|Ric_0|^2",
                                lhs, rhs, residual, tol)


def ricci_divergence_residual(solution: CriticalSolution, f_floor=None, scaled: bool = False) -> float:
    """Largest gap in ``div(Ric(grad f) - (R/n) grad f) = f |Ric_0|^2`` on ``{f >= f_floor}``."""
    mask = _region(solution, f_floor)
    n = solution.n
    rr, rt = traceless_ricci(solution.metric)
    R = solution.R
    div = face_divergence(solution, lambda s: ((n - 1) * (-s.ddw / s.w) - R / n) * s.df)
    rhs = solution.potential.f * (rr**2 + (n - 1) * rt**2)
    gap = float(np.max(np.abs(div - rhs)[mask]))
    return gap / max(1.0, float(np.max(np.abs(rhs[mask])))) if scaled else gap


def trace_integral_balance(solution: CriticalSolution, tol=None) -> CheckReport:
    """Integrated trace equation: ``sum |grad f| area = n/(n-1) Vol + R/(n-1) int f``."""
    tol = default_tol(solution) * 10 if tol is None else tol
    n, R = solution.n, solution.R
    lhs = sum(bc.grad_norm * bc.area for bc in solution.boundary)
    vol = integrate(solution, np.ones_like(solution.potential.f))
    rhs = n / (n - 1) * vol + R / (n - 1) * integrate(solution, solution.potential.f)
    residual = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-14)
    return CheckReport.asserted("trace_integral_balance", "integrated trace equation",
                                lhs, rhs, residual, tol)


def no_islands_check(solution: CriticalSolution) -> CheckReport:
    """Every component of the domain minus MAX(f) reaches the boundary."""
    touching = sum(1 for comp in solution.components if solution.component_boundary(comp))
    total = len(solution.components)
    return CheckReport.asserted("no_islands", "no-islands property of MAX(f) components",
                                touching, total, total - touching, 0.0)


def einstein_defect(solution: CriticalSolution) -> float:
    """Largest ``|Ric_0|`` on the grid, relative to the Ricci scale."""
    rr, rt = traceless_ricci(solution.metric)
    ric_r, ric_t = ricci_arrays(solution.metric)
    mask = solution.metric.regular
    scale = max(float(np.max(np.abs(ric_r[mask]))), float(np.max(np.abs(ric_t[mask]))), 1.0)
    return float(max(np.max(np.abs(rr[mask])), np.max(np.abs(rt[mask])))) / scale
