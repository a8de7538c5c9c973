"""Explicit critical metrics: geodesic balls and Schwarzschild-type necks.

Geodesic balls in the three space forms have closed-form potentials.  The
(AdS-)Schwarzschild examples live on a domain that contains the horizon, so
they are built in arc-length gauge, where the metric ``drho^2 + w(rho)^2
g_round`` is smooth across the minimal sphere ``rho = 0``: ``rho > 0`` is the
primary sheet (areal radius ``r2`` on its boundary), ``rho < 0`` the reflected
sheet (areal radius ``r1``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import (
    DomainError,
    NoPositiveSolutionError,
    NotCriticalError,
    UnsupportedDomainError,
)
from .geometry import (
    DEFAULT_GRID,
    FrameSample,
    CriticalSolution,
    RadialProfile,
    SpaceForm,
    WarpedMetric,
    hessian_arrays,
    ricci_arrays,
)

ODE_TOL = 1e-12
HORIZON_MARGIN = 1e-6
DEGENERATE_MAX = 1e-10


# -- geodesic balls ----------------------------------------------------------

@dataclass(frozen=True)
class BallSpec:
    kind: SpaceForm
    n: int
    r0: float

    def __post_init__(self):
        if not isinstance(self.kind, SpaceForm):
            object.__setattr__(self, "kind", SpaceForm(self.kind))
        if int(self.n) != self.n or self.n < 3:
            raise UnsupportedDomainError(f"dimension must be an integer >= 3, got {self.n}")
        if not (math.isfinite(self.r0) and self.r0 > 0):
            raise UnsupportedDomainError(f"radius must be positive, got {self.r0}")
        if self.kind is SpaceForm.SPHERICAL and not (self.r0 < math.pi / 2 and math.cos(self.r0) > 0):
            raise UnsupportedDomainError(
                f"spherical balls need r0 < pi/2 for a positive potential, got {self.r0}")


def _ball_warp(kind: SpaceForm, x):
    x = np.asarray(x, dtype=float)
    if kind is SpaceForm.EUCLIDEAN:
        return x, np.ones_like(x), np.zeros_like(x)
    if kind is SpaceForm.SPHERICAL:
        return np.sin(x), np.cos(x), -np.sin(x)
    return np.sinh(x), np.cosh(x), np.sinh(x)


def _ball_potential(spec: BallSpec, x):
    """Closed-form potential and its first two derivatives."""
    x = np.asarray(x, dtype=float)
    n1 = spec.n - 1
    if spec.kind is SpaceForm.EUCLIDEAN:
        return (spec.r0**2 - x**2) / (2 * n1), -x / n1, np.full_like(x, -1.0 / n1)
    if spec.kind is SpaceForm.SPHERICAL:
        c0 = n1 * float(np.cos(spec.r0))
        return (np.cos(x) - float(np.cos(spec.r0))) / c0, -np.sin(x) / c0, -np.cos(x) / c0
    c0 = n1 * float(np.cosh(spec.r0))
    return (float(np.cosh(spec.r0)) - np.cosh(x)) / c0, -np.sinh(x) / c0, -np.cosh(x) / c0


def construct_ball(spec: BallSpec, grid_size: int = DEFAULT_GRID) -> CriticalSolution:
    """Geodesic ball of radius ``r0`` with its closed-form potential."""
    grid = np.linspace(0.0, spec.r0, int(grid_size))
    grid[-1] = spec.r0
    w, dw, ddw = _ball_warp(spec.kind, grid)
    k = spec.kind.k
    metric = WarpedMetric.arc_length(spec.n, grid, w, dw, ddw, spec.kind.scalar_curvature(spec.n),
                                     kt=np.full_like(grid, float(k)))
    profile = RadialProfile.from_arrays(grid, *_ball_potential(spec, grid))

    def field(x):
        x = np.asarray(x, dtype=float)
        return FrameSample(*_ball_warp(spec.kind, x), np.full_like(x, float(k)),
                           *_ball_potential(spec, x))

    f_max = float(_ball_potential(spec, 0.0)[0])
    return CriticalSolution(
        kind=f"{spec.kind.value}_ball",
        params={"space": spec.kind.value, "n": spec.n, "r0": spec.r0},
        metric=metric,
        potential=profile,
        f_max=f_max,
        max_locus=(0.0,),
        max_type="point",
        boundary_indices=(grid.shape[0] - 1,),
        components=((0.0, float(spec.r0)),),
        field=field,
        closed_form=True,
    )


# -- Schwarzschild and AdS-Schwarzschild -------------------------------------

@dataclass(frozen=True)
class SchwarzschildSpec:
    """Neck domain of the (AdS-)Schwarzschild slice of mass ``m``.

    ``r2`` is the areal radius of the boundary sphere on the primary sheet.
    The boundary sphere on the reflected sheet is forced by the overdetermined
    system; pass ``r1`` only to request (and verify) a specific one.
    """

    n: int
    m: float
    r2: float
    r1: Optional[float] = None
    ads: bool = False

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise DomainError(f"dimension must be an integer >= 3, got {self.n}")
        if not (math.isfinite(self.m) and self.m > 0):
            raise DomainError(f"mass must be positive, got {self.m}")
        for name in ("r1", "r2"):
            r = getattr(self, name)
            if r is None:
                continue
            if not math.isfinite(r) or r <= 0:
                raise DomainError(f"{name} must be a positive areal radius, got {r}")
            if self.lapse(r) <= 0:
                raise DomainError(f"{name} = {r} lies inside the horizon r_h = {self.horizon:.12g}")
            if r < self.horizon * (1 + HORIZON_MARGIN):
                raise DomainError(f"{name} = {r} is too close to the horizon r_h = {self.horizon:.12g}")

    @property
    def R(self) -> float:
        return -float(self.n * (self.n - 1)) if self.ads else 0.0

    def lapse(self, r):
        V = 1.0 - 2.0 * self.m * np.power(r, 2.0 - self.n)
        return V + np.square(r) if self.ads else V

    def dlapse(self, r):
        dV = 2.0 * (self.n - 2) * self.m * np.power(r, 1.0 - self.n)
        return dV + 2.0 * np.asarray(r) if self.ads else dV

    @property
    def horizon(self) -> float:
        rs = (2.0 * self.m) ** (1.0 / (self.n - 2))
        if not self.ads:
            return rs
        return brentq(self.lapse, rs * 1e-6, rs, xtol=1e-15, rtol=1e-15)


def _warp_frame(spec: SchwarzschildSpec, w):
    ddw = 0.5 * spec.dlapse(w)
    kt = (1.0 - spec.lapse(w)) / np.square(w)
    return ddw, kt


def _radial_rhs(spec: SchwarzschildSpec, forced: bool):
    """Radial equation ``f'' = -(n-1)(w''/w) f - (R f + 1)/(n-1)`` coupled to the warp."""
    n, R = spec.n, spec.R
    source = 1.0 if forced else 0.0

    def rhs(_, y):
        w, dw = y[0], y[1]
        ddw = 0.5 * spec.dlapse(w)
        out = [dw, ddw]
        for j in range(2, len(y), 2):
            out += [y[j + 1], -(n - 1) * ddw / w * y[j] - (R * y[j] + source) / (n - 1)]
        return out

    return rhs


def _bvp_rhs(spec: SchwarzschildSpec):
    """Warp, one forced (particular) and one homogeneous radial solution."""
    n, R = spec.n, spec.R

    def rhs(_, y):
        w, dw, p, dp, h, dh = y
        ddw = 0.5 * spec.dlapse(w)
        c = (n - 1) * ddw / w
        return [dw, ddw, dp, -c * p - (R * p + 1.0) / (n - 1), dh, -c * h - R * h / (n - 1)]

    return rhs


def horizon_potential(spec: SchwarzschildSpec) -> float:
    """Value of the horizon-regular potential on the minimal sphere.

    At ``rho = 0`` the tangential equation loses its derivative term and pins
    ``f = 1 / ((n-1) Ric_t - R)``.
    """
    rh = spec.horizon
    n = spec.n
    ddw, kt = _warp_frame(spec, rh)
    ric_t = -ddw / rh + (n - 2) * kt
    return 1.0 / ((n - 1) * ric_t - spec.R)


def _horizon_sweep(spec: SchwarzschildSpec, w_stop: float):
    """Integrate the warp and the even, horizon-regular potential outward from ``rho = 0``."""
    event = lambda _, y: y[0] - w_stop
    event.terminal = True
    rho_end = 10.0 * w_stop + 10.0
    sol = solve_ivp(_radial_rhs(spec, forced=True), (0.0, rho_end),
                    [spec.horizon, 0.0, horizon_potential(spec), 0.0],
                    method="DOP853", rtol=ODE_TOL, atol=ODE_TOL, dense_output=True, events=event)
    if not sol.success:
        raise NoPositiveSolutionError(f"horizon integration failed: {sol.message}")
    return sol


def _arc_coordinate(sweep, r: float) -> float:
    rho_end = sweep.t[-1]
    return brentq(lambda s: sweep.sol(s)[0] - r, 0.0, rho_end, xtol=1e-14, rtol=1e-15)


def admissible_partner(spec: SchwarzschildSpec, r2: Optional[float] = None):
    """Arc-length and areal radius of the reflected-sheet boundary forced by ``r2``.

    Every horizon-regular solution of the overdetermined system is
    ``f_reg + c * w'`` with ``w'`` the static lapse.  ``c`` is fixed by
    ``f(rho2) = 0`` and the first zero on the reflected sheet is returned.
    """
    r2 = spec.r2 if r2 is None else r2
    w_stop = 50.0 * max(r2, spec.horizon)
    sweep = _horizon_sweep(spec, w_stop)
    rho2 = _arc_coordinate(sweep, r2)
    _, dw2, freg2, _ = sweep.sol(rho2)
    c = -freg2 / dw2
    g = lambda s: sweep.sol(s)[2] - c * sweep.sol(s)[1]
    probe = np.linspace(0.0, sweep.t[-1], 4001)
    values = np.array([g(s) for s in probe])
    sign_change = np.nonzero(np.sign(values[1:]) != np.sign(values[:-1]))[0]
    if values[0] <= 0 or sign_change.size == 0:
        raise NoPositiveSolutionError(
            f"no positive critical potential vanishes at r2 = {r2} on this slice")
    k = sign_change[0]
    rho1 = brentq(g, probe[k], probe[k + 1], xtol=1e-14, rtol=1e-15)
    return rho1, float(sweep.sol(rho1)[0])


def construct_schwarzschild(spec: SchwarzschildSpec, grid_size: int = DEFAULT_GRID,
                            tol: float = 1e-8, seed_slope: float = 1.0,
                            particular_slope: float = 0.0) -> CriticalSolution:
    """Critical metric on the (AdS-)Schwarzschild neck between two spheres.

    The radial equation is a linear second-order ODE; with the warp it is
    integrated from the reflected-sheet boundary as one forced and one
    homogeneous initial-value problem, superposed so that ``f`` vanishes on
    both boundary spheres.  The tangential equation is then checked as the
    consistency condition of the overdetermined system.
    """
    grid_size = int(grid_size)
    rho1_adm, r1_adm = admissible_partner(spec)
    r1 = r1_adm if spec.r1 is None else float(spec.r1)
    sweep = _horizon_sweep(spec, 2.0 * max(r1, spec.r2))
    rho2 = _arc_coordinate(sweep, spec.r2)
    rho1 = -(rho1_adm if spec.r1 is None else _arc_coordinate(sweep, r1))

    y0 = [r1, -math.sqrt(spec.lapse(r1)), 0.0, particular_slope, 0.0, seed_slope]
    sol = solve_ivp(_bvp_rhs(spec), (rho1, rho2), y0, method="DOP853",
                    rtol=ODE_TOL, atol=ODE_TOL, dense_output=True)
    if not sol.success:
        raise NoPositiveSolutionError(f"radial integration failed: {sol.message}")
    end = sol.sol(rho2)
    if abs(end[4]) < 1e-12 * max(1.0, abs(end[2])):
        raise NoPositiveSolutionError("homogeneous solution vanishes at r2; the boundary problem is resonant")
    alpha = -end[2] / end[4]
    n, R = spec.n, spec.R

    def field(x):
        x = np.asarray(x, dtype=float)
        w, dw, p, dp, h, dh = sol.sol(x)
        ddw, kt = _warp_frame(spec, w)
        f = p + alpha * h
        df = dp + alpha * dh
        ddf = -(n - 1) * ddw / w * f - (R * f + 1.0) / (n - 1)
        return FrameSample(w, dw, ddw, kt, f, df, ddf)

    grid = np.linspace(rho1, rho2, grid_size)
    grid[0], grid[-1] = rho1, rho2
    s = field(grid)
    f = np.array(s.f)
    scale = float(np.max(np.abs(f)))
    if max(abs(f[0]), abs(f[-1])) > 1e-9 * scale:
        raise NoPositiveSolutionError("superposed solution misses the boundary condition")
    f[0] = f[-1] = 0.0
    ddf = -(n - 1) * s.ddw / s.w * f - (R * f + 1.0) / (n - 1)
    if np.any(f[1:-1] <= 0):
        raise NoPositiveSolutionError(
            f"potential is not positive between the boundary spheres (admissible r1 = {r1_adm:.12g})")

    metric = WarpedMetric.arc_length(n, grid, s.w, s.dw, s.ddw, R, kt=s.kt)
    profile = RadialProfile.from_arrays(grid, f, s.df, ddf)

    radial, tangential, trace = system_residual(metric, profile)
    if tangential > tol:
        raise NotCriticalError(
            f"tangential residual {tangential:.3e} exceeds {tol:.1e}: no critical metric vanishes on "
            f"r1 = {r1:.12g}, r2 = {spec.r2:.12g}; the admissible reflected-sheet radius is {r1_adm:.12g}")

    df_grid = np.asarray(s.df)
    turns = np.nonzero(np.sign(df_grid[1:]) != np.sign(df_grid[:-1]))[0]
    if turns.size != 1:
        raise NoPositiveSolutionError(f"expected one interior maximum sphere, found {turns.size}")
    dfun = lambda x: float(field(x).df)
    rho_star = brentq(dfun, rho1, rho2, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    star = field(rho_star)
    f_max = float(star.f)

    params = {
        "n": n, "mass": spec.m, "ads": spec.ads, "r1": r1, "r2": spec.r2,
        "r1_admissible": r1_adm, "rho1": rho1, "rho2": rho2, "r_horizon": spec.horizon,
        "rho_star": rho_star, "r_star": float(star.w),
        "max_curvature": float(star.ddf), "max_nondegenerate": bool(abs(star.ddf) >= DEGENERATE_MAX),
    }
    return CriticalSolution(
        kind="ads_schwarzschild" if spec.ads else "schwarzschild",
        params=params,
        metric=metric,
        potential=profile,
        f_max=f_max,
        max_locus=(rho_star,),
        max_type="sphere",
        boundary_indices=(0, grid_size - 1),
        components=((rho1, rho_star), (rho_star, rho2)),
        field=field,
        closed_form=False,
        boundary_atol=0.0,
    )


# -- residuals of the fundamental system --------------------------------------

def system_residual(metric: WarpedMetric, profile: RadialProfile):
    n, R = metric.n, metric.R
    ric_r, ric_t = ricci_arrays(metric)
    hr, ht, lap = hessian_arrays(metric, profile)
    f = profile.f
    mask = metric.regular
    radial = -lap + hr - f * ric_r - 1.0
    tangential = -lap + ht - f * ric_t - 1.0
    trace = lap + R * f / (n - 1) + n / (n - 1)
    return tuple(float(np.max(np.abs(a[mask]))) for a in (radial, tangential, trace))


def miao_tam_residual(solution: CriticalSolution):
    """Largest absolute residuals of the radial, tangential and traced critical equation."""
    return system_residual(solution.metric, solution.potential)


def pointwise_residual(solution: CriticalSolution) -> np.ndarray:
    """Pointwise maximum of the three residual components (NaN at a regular centre)."""
    metric, profile = solution.metric, solution.potential
    n, R = metric.n, metric.R
    ric_r, ric_t = ricci_arrays(metric)
    hr, ht, lap = hessian_arrays(metric, profile)
    f = profile.f
    parts = np.abs(np.vstack([-lap + hr - f * ric_r - 1.0,
                              -lap + ht - f * ric_t - 1.0,
                              lap + R * f / (n - 1) + n / (n - 1)]))
    return np.max(parts, axis=0)
