"""Level-set functional F(t), its monotonicity and blow-up, and the Lojasiewicz exponent near the maximum."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq

from .errors import InconclusiveError, LevelSetError
from .geometry import CriticalSolution, sphere_area
from .identities import CheckReport

REGULAR_GRADIENT = 1e-12
CRITICAL_VALUE_GAP = 1e-10
BLOWUP_LEVELS = tuple(range(4, 15))
BLOWUP_RATIO = 10.0
EXPONENT_BAND = 0.1
LOJASIEWICZ_WINDOW = (0.9, 0.999)
LOJASIEWICZ_SAMPLES = 64
DEGENERATE_MAX = 1e-10


@dataclass(frozen=True, eq=False)
class FTrace:
    component: tuple
    t_grid: np.ndarray
    F_values: np.ndarray
    h_values: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.t_grid) <= 0):
            raise ValueError("t_grid must be strictly increasing")
        if np.any(self.h_values <= 0):
            raise ValueError("h(t) must be positive below f_max")
        if not np.all(np.isfinite(self.F_values)):
            raise ValueError("F values must be finite")

    @property
    def relative_spread(self) -> float:
        F = self.F_values
        return float((F.max() - F.min()) / max(abs(F).max(), 1e-300))


@dataclass(frozen=True)
class LojasiewiczFit:
    theta_hat: float
    window: tuple
    C_hat: float
    samples: int

    def __post_init__(self):
        lo, hi = self.window
        if not 0 < lo < hi:
            raise ValueError("window must lie strictly inside (0, f_max)")
        if self.samples < 16:
            raise ValueError("need at least 16 sample points")


def _ends(solution: CriticalSolution, component):
    """``(maximum end, boundary end)`` of a component."""
    a, b = component
    if any(np.isclose(a, m, rtol=0, atol=1e-12) for m in solution.max_locus):
        return a, b
    return b, a


def h_value(solution: CriticalSolution, t):
    n, R, fm = solution.n, solution.R, solution.f_max
    t = np.asarray(t, dtype=float)
    return (R * (fm**2 - t**2) + 2 * n * (fm - t)) / (n * (n - 1))


def level_set_coordinate(solution: CriticalSolution, component, t: float) -> float:
    """Coordinate of the level sphere ``{f = t}`` inside a component."""
    fm = solution.f_max
    if not 0 <= t < fm:
        raise LevelSetError(f"level {t!r} outside [0, f_max = {fm!r})")
    top, edge = _ends(solution, component)
    if t == 0:
        return float(edge)
    g = lambda x: float(solution.field(np.array(x)).f) - t
    return float(brentq(g, min(top, edge), max(top, edge), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))


def level_set_radius(solution: CriticalSolution, component, t: float) -> float:
    x = level_set_coordinate(solution, component, t)
    return float(solution.field(np.array(x)).w)


def level_set_flux(solution: CriticalSolution, component, t: float) -> float:
    """``|grad f| * area`` of the level sphere ``{f = t}`` in the component."""
    x = level_set_coordinate(solution, component, t)
    s = solution.field(np.array(x))
    grad = abs(float(s.df))
    if grad < REGULAR_GRADIENT:
        raise LevelSetError(f"level {t!r} is not a regular value (|grad f| = {grad:.3e})")
    return grad * sphere_area(solution.n) * float(s.w) ** (solution.n - 1)


def enclosed_laplacian(solution: CriticalSolution, component, t: float, samples: int = 4097) -> float:
    """``int_{{f > t}} Delta f dV`` over the component, by Simpson quadrature of the field."""
    x = level_set_coordinate(solution, component, t)
    top, _ = _ends(solution, component)
    xs = np.linspace(min(top, x), max(top, x), samples)
    s = solution.field(xs)
    n = solution.n
    with np.errstate(divide="ignore", invalid="ignore"):
        lap = np.where(s.w > 0, s.ddf + (n - 1) * s.dw * s.df / s.w, n * s.ddf)
    return float(simpson(lap * sphere_area(n) * s.w ** (n - 1), x=xs))


def default_t_grid(solution: CriticalSolution, size: int = 64) -> np.ndarray:
    return np.linspace(0.0, 0.98 * solution.f_max, size)


def f_functional(solution: CriticalSolution, component, t_grid=None) -> FTrace:
    """``F(t) = h(t)^{-n/2} * level_set_flux(t)``; levels within 1e-10 of a critical value are skipped."""
    t_grid = default_t_grid(solution) if t_grid is None else np.asarray(t_grid, dtype=float)
    keep = np.abs(t_grid - solution.f_max) > CRITICAL_VALUE_GAP
    t_grid = t_grid[keep]
    h = h_value(solution, t_grid)
    flux = np.array([level_set_flux(solution, component, float(t)) for t in t_grid])
    return FTrace(tuple(component), t_grid, h ** (-solution.n / 2) * flux, h)


def monotonicity_check(trace: FTrace, hypothesis_ok: bool, tol: float = 1e-6) -> CheckReport:
    F = trace.F_values
    excess = F[1:] - F[:-1] - tol * np.abs(F[:-1])
    violations = int(np.sum(excess > 0))
    worst = float(np.max((F[1:] - F[:-1]) / np.maximum(np.abs(F[:-1]), 1e-300))) if F.size > 1 else 0.0
    detail = f"{violations} increase(s) over {F.size} levels"
    anchor = "F is nonincreasing under the boundary mean-curvature hypothesis"
    if hypothesis_ok:
        status = "pass" if violations == 0 else "fail"
    else:
        status = "informational"
        detail += "; hypothesis does not hold"
    return CheckReport("F_monotonicity", anchor, float(F[0]), float(F[-1]),
                       max(worst, 0.0), tol, status, detail)


def blowup_levels(solution: CriticalSolution) -> np.ndarray:
    return np.array([solution.f_max * (1 - 2.0 ** -k) for k in BLOWUP_LEVELS])


def blowup_exponent(solution: CriticalSolution, component, trace: FTrace = None) -> float:
    """Least-squares slope of ``log F`` against ``log(f_max - t)`` on the geometric tail."""
    trace = f_functional(solution, component, blowup_levels(solution)) if trace is None else trace
    gap = solution.f_max - trace.t_grid
    return float(np.polyfit(np.log(gap), np.log(trace.F_values), 1)[0])


def blowup_check(solution: CriticalSolution, component) -> CheckReport:
    """Bounded F for a point maximum, divergent F for a spherical one.

    For a spherical maximum the fitted tail exponent must also respect the
    lower bound ``(f_max - t)^{-(n-2)/2}``, i.e. be at most ``-(n-2)/2 + 0.1``.
    """
    anchor = "blow-up of F at a maximum set of positive measure"
    t = blowup_levels(solution)
    try:
        trace = f_functional(solution, component, t)
    except LevelSetError as exc:
        return CheckReport("F_blowup", anchor, np.nan, np.nan, np.nan, BLOWUP_RATIO,
                           "inconclusive", str(exc))
    F = trace.F_values
    ratio = float(F[-1] / F[0])
    slope = blowup_exponent(solution, component, trace)
    bound = -(solution.n - 2) / 2
    detail = f"max type {solution.max_type}, tail exponent {slope!r}"
    if solution.max_type == "point":
        ok = ratio <= BLOWUP_RATIO
    elif solution.max_type == "sphere":
        increasing = bool(np.all(np.diff(F[-4:]) > 0))
        ok = ratio >= BLOWUP_RATIO and increasing and slope <= bound + EXPONENT_BAND
        detail += f", lower-bound exponent {bound!r}, increasing tail {increasing}"
    else:
        return CheckReport("F_blowup", anchor, float(F[0]), float(F[-1]), ratio, BLOWUP_RATIO,
                           "inconclusive", detail)
    return CheckReport("F_blowup", anchor, float(F[0]), float(F[-1]), ratio, BLOWUP_RATIO,
                       "pass" if ok else "fail", detail)


def lojasiewicz_fit(solution: CriticalSolution, component, samples: int = LOJASIEWICZ_SAMPLES) -> LojasiewiczFit:
    """Slope of ``log |grad f|^2`` against ``log(f_max - f)`` for ``f`` in ``[0.9, 0.999] f_max``."""
    fm = solution.f_max
    top, _ = _ends(solution, component)
    curv = abs(float(solution.field(np.array(top)).ddf))
    if curv < DEGENERATE_MAX:
        raise InconclusiveError(f"degenerate maximum (|f''| = {curv:.3e})")
    lo, hi = LOJASIEWICZ_WINDOW
    gap = np.geomspace((1 - hi) * fm, (1 - lo) * fm, samples)
    grad2 = np.empty(samples)
    for i, g in enumerate(gap):
        x = level_set_coordinate(solution, component, fm - g)
        grad2[i] = float(solution.field(np.array(x)).df) ** 2
    slope, intercept = np.polyfit(np.log(gap), np.log(grad2), 1)
    return LojasiewiczFit(float(slope), (lo * fm, hi * fm), float(np.exp(intercept)), samples)
