"""Check-suite assembly, run configuration and deterministic serialization."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

import numpy as np

from . import estimates as est
from . import identities as ids
from . import levelset as lvl
from .errors import CritlabError, InconclusiveError
from .geometry import CriticalSolution, MIN_GRID
from .solutions import miao_tam_residual

CONFIG_ENV = "CRITLAB_CONFIG"
FORMATS = ("json", "csv", "text")
# Phi's elliptic operator takes two nested finite differences of Phi, so its
# round-off floor sits near eps * |Phi| / h^2 rather than at the data tolerance.
ELLIPTIC_TOL = 1e-7
MAX_PRINCIPLE_TOL = 1e-8
THETA_BAND = (0.9, 1.1)


@dataclass(frozen=True)
class RunConfig:
    tol_closed_form: float = 1e-9
    tol_bvp: float = 1e-6
    grid_size: int = 2048
    f_floor_fraction: float = 0.02
    output: Optional[str] = None
    format: str = "json"

    def __post_init__(self):
        if not (self.tol_closed_form > 0 and self.tol_bvp > 0):
            raise ValueError("tolerances must be positive")
        if self.grid_size < MIN_GRID:
            raise ValueError(f"grid_size must be at least {MIN_GRID}")
        if not 0 < self.f_floor_fraction < 1:
            raise ValueError("f_floor_fraction must lie in (0, 1)")
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")

    def tol_for(self, solution: CriticalSolution) -> float:
        return self.tol_closed_form if solution.closed_form else self.tol_bvp

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("output")
        return d


_CASTS = {"tol_closed_form": float, "tol_bvp": float, "grid_size": int,
          "f_floor_fraction": float, "output": str, "format": str}


def read_config_file(path) -> dict:
    """``key = value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in _CASTS:
                raise ValueError(f"{path}:{lineno}: cannot parse {raw.strip()!r}")
            out[key] = _CASTS[key](value.strip())
    return out


def load_config(flags: dict, config_path=None, environ=None) -> RunConfig:
    """Flags beat the config file, which beats the defaults.

    The environment only supplies the config-file path, and only when no
    ``--config`` flag was given.
    """
    environ = os.environ if environ is None else environ
    path = config_path or environ.get(CONFIG_ENV)
    values = read_config_file(path) if path else {}
    values.update({k: v for k, v in flags.items() if v is not None})
    known = {f.name for f in fields(RunConfig)}
    return RunConfig(**{k: v for k, v in values.items() if k in known})


def _check_dict(item) -> dict:
    if isinstance(item, ids.CheckReport):
        return {"name": item.name, "paper_anchor": item.paper_anchor, "lhs": item.lhs,
                "rhs": item.rhs, "residual": item.residual, "tol": item.tol,
                "status": item.status, "detail": item.detail}
    if isinstance(item, est.EstimateResult):
        return {"name": item.name, "paper_anchor": item.paper_anchor,
                "lhs": item.attained_value, "rhs": item.bound_value, "residual": -item.margin,
                "tol": item.tol, "status": item.status, "margin": item.margin,
                "equality": item.equality, "hypothesis_ok": item.hypothesis_ok,
                "detail": item.detail}
    raise TypeError(f"cannot serialise {type(item).__name__}")


def _residual_checks(solution, tol):
    radial, tangential, trace = miao_tam_residual(solution)
    anchor = "critical metric system -(Delta f) g + Hess f - f Ric = g"
    out = [ids.CheckReport.asserted(f"system_{name}", anchor, val, 0.0, val, tol)
           for name, val in (("radial", radial), ("tangential", tangential), ("trace", trace))]
    tl = ids.traceless_identity_residual(solution)
    out.append(ids.CheckReport.asserted("traceless_identity", "traceless identity f Ric_0 = Hess_0 f",
                                        tl, 0.0, tl, tol))
    return out


def _phi_checks(solution, tol, floor):
    prof = ids.phi_profile(solution, floor)
    out = []
    einstein = ids.einstein_defect(solution) <= 1e-8
    scale = max(abs(prof.phi_at_max_expected), 1e-300)
    anchor = "Phi is a subsolution, constant in the Einstein case"
    if einstein:
        out.append(ids.CheckReport.asserted("phi_constancy", anchor, float(np.max(prof.phi)),
                                            float(np.min(prof.phi)), prof.spread / scale, tol))
    else:
        out.append(ids.CheckReport("phi_constancy", anchor, float(np.max(prof.phi)),
                                   float(np.min(prof.phi)), prof.spread / scale, tol,
                                   "informational", "non-Einstein: Phi is not expected to be constant"))
    gap_max = abs(prof.phi_at_max - prof.phi_at_max_expected)
    out.append(ids.CheckReport.asserted("phi_on_max", "value of Phi on MAX(f)", prof.phi_at_max,
                                        prof.phi_at_max_expected, gap_max / scale, tol))
    gap = ids.maximum_principle_gap(solution, prof)
    out.append(ids.CheckReport.asserted("phi_maximum_principle", "maximum principle for Phi",
                                        gap, 0.0, max(gap, 0.0), MAX_PRINCIPLE_TOL))
    out.append(ids.CheckReport.asserted("phi_elliptic", "degenerate elliptic inequality for Phi",
                                        prof.min_elliptic, 0.0, max(-prof.min_elliptic, 0.0),
                                        ELLIPTIC_TOL))
    return out


def _identity_checks(solution, tol, floor):
    out = _residual_checks(solution, tol)
    rs = ids.robinson_shen_residual(solution, floor, scaled=True)
    out.append(ids.CheckReport.asserted("robinson_shen", "Robinson-Shen divergence identity",
                                        rs, 0.0, rs, tol))
    rd = ids.ricci_divergence_residual(solution, floor, scaled=True)
    out.append(ids.CheckReport.asserted("ricci_divergence",
                                        "div(Ric(grad f) - (R/n) grad f) = f|Ric_0|^2", rd, 0.0, rd, tol))
    out += _phi_checks(solution, tol, floor)
    out += ids.gauss_equation_check(solution, max(tol, 1e-7))
    out.append(ids.divergence_balance(solution, 10 * tol))
    out.append(ids.trace_integral_balance(solution, 10 * tol))
    out.append(ids.no_islands_check(solution))
    return out


def _estimate_checks(solution, tol):
    out = [est.mean_curvature_bound(solution, tol)]
    for comp in solution.components:
        out.append(est.localized_mean_curvature_bound(solution, comp, tol))
    out.append(est.potential_upper_bound(solution, tol))
    out.append(est.area_volume_bound(solution, tol))
    out += est.boundary_area_estimate(solution, max(tol, 1e-8))
    for comp in solution.components:
        out.append(est.localized_boundary_estimate(solution, comp, tol))
        out.append(est.gradient_bound_check(solution, comp, tol))
    return out


def _levelset_checks(solution, tol):
    out = []
    for k, comp in enumerate(solution.components):
        trace = lvl.f_functional(solution, comp)
        hyp = est.gradient_hypothesis(solution, comp, tol)
        mono = lvl.monotonicity_check(trace, hyp, max(tol, 1e-6))
        out.append(replace(mono, name=f"F_monotonicity[{k}]"))
        out.append(replace(lvl.blowup_check(solution, comp), name=f"F_blowup[{k}]"))
        anchor = "reverse Lojasiewicz exponent near MAX(f)"
        try:
            fit = lvl.lojasiewicz_fit(solution, comp)
        except InconclusiveError as exc:
            out.append(ids.CheckReport(f"lojasiewicz[{k}]", anchor, math.nan, 1.0, math.nan,
                                       0.1, "inconclusive", str(exc)))
            continue
        lo, hi = THETA_BAND
        off = max(lo - fit.theta_hat, fit.theta_hat - hi, 0.0)
        out.append(ids.CheckReport.asserted(f"lojasiewicz[{k}]", anchor, fit.theta_hat, 1.0, off, 0.0,
                                            f"window {fit.window!r}, C {fit.C_hat!r}"))
    return out


def run_suite(solution: CriticalSolution, config: RunConfig) -> list:
    """Every identity, estimate and level-set check for one solution, in a fixed order."""
    tol = config.tol_for(solution)
    floor = config.f_floor_fraction * solution.f_max
    return _identity_checks(solution, tol, floor) + _estimate_checks(solution, tol) + _levelset_checks(solution, tol)


def overall_pass(checks) -> bool:
    return all(c.status == "pass" for c in checks if c.status in ("pass", "fail"))


@dataclass(frozen=True)
class SuiteReport:
    config: dict
    solution: dict
    checks: list
    overall_pass: bool

    @classmethod
    def build(cls, solution: CriticalSolution, config: RunConfig) -> "SuiteReport":
        checks = run_suite(solution, config)
        return cls(config.echo(), solution.summary(), [_check_dict(c) for c in checks],
                   overall_pass(checks))

    def as_dict(self) -> dict:
        return {"config": self.config, "solution": self.solution,
                "checks": self.checks, "overall_pass": self.overall_pass}

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return to_json(self.as_dict())
        if fmt == "csv":
            cols = ("name", "status", "lhs", "rhs", "residual", "tol", "paper_anchor")
            return to_csv(cols, [[c[k] for k in cols] for c in self.checks])
        lines = [f"{self.solution['kind']} n={self.solution['n']} f_max={self.solution['f_max']!r}"]
        for c in self.checks:
            lines.append(f"{c['status']:<18} {c['name']:<36} residual={_fmt17(c['residual'])} tol={_fmt17(c['tol'])}")
        lines.append(f"overall_pass={self.overall_pass}")
        return "\n".join(lines) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def to_json(payload) -> str:
    return json.dumps(_clean(payload), indent=2, allow_nan=False) + "\n"


def _fmt17(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating, int, np.integer)):
        return format(float(value), ".17g")
    return "" if value is None else str(value)


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    buf.write("# " + ",".join(columns) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([_fmt17(v) for v in row])
    return buf.getvalue()


def summary_row(value: float, solution: Optional[CriticalSolution], config: RunConfig,
                error: Optional[CritlabError] = None) -> dict:
    """One scan row: the headline mean-curvature estimate plus suite totals."""
    if solution is None:
        return {"value": value, "status": "error", "overall_pass": False, "asserted": 0,
                "failed": 0, "H_min": math.nan, "H_bound": math.nan, "margin": math.nan,
                "equality": False, "error": f"{type(error).__name__}: {error}"}
    checks = run_suite(solution, config)
    asserted = [c for c in checks if c.status in ("pass", "fail")]
    mc = next(c for c in checks if getattr(c, "name", "") == "mean_curvature_bound")
    return {"value": value, "status": "ok", "overall_pass": overall_pass(checks),
            "asserted": len(asserted), "failed": sum(c.status == "fail" for c in asserted),
            "H_min": mc.attained_value, "H_bound": mc.bound_value, "margin": mc.margin,
            "equality": mc.equality, "error": ""}


SCAN_COLUMNS = ("value", "status", "overall_pass", "asserted", "failed",
                "H_min", "H_bound", "margin", "equality", "error")


def render_scan(parameter: str, rows: list, config: RunConfig, fmt: str) -> str:
    ok = all(r["overall_pass"] for r in rows)
    if fmt == "json":
        return to_json({"config": config.echo(), "scan": {"parameter": parameter, "rows": rows},
                        "overall_pass": ok})
    if fmt == "csv":
        return to_csv(SCAN_COLUMNS, [[r[k] for k in SCAN_COLUMNS] for r in rows])
    lines = [f"scan over {parameter}"]
    for r in rows:
        if r["status"] == "error":
            lines.append(f"{_fmt17(r['value'])}  error  {r['error']}")
        else:
            lines.append(f"{_fmt17(r['value'])}  pass={r['overall_pass']}  failed={r['failed']}/{r['asserted']}"
                         f"  margin={_fmt17(r['margin'])}  equality={r['equality']}")
    lines.append(f"overall_pass={ok}")
    return "\n".join(lines) + "\n"
