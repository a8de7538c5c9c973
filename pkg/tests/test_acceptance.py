"""Exit criteria of the verification suite, one test per criterion.

Each test appends a ``[PASS]`` or ``[FAIL]`` line that the terminal summary
prints in criterion order.
"""
import math
import subprocess
import sys

import numpy as np
import pytest

from critlab import estimates as est
from critlab.estimates import (
    area_volume_bound,
    boundary_area_estimate,
    critical_mean_curvature,
    gradient_bound_check,
    gradient_bound_profile,
    gradient_hypothesis,
)
from critlab.geometry import SpaceForm
from critlab.identities import (
    divergence_balance,
    maximum_principle_gap,
    phi_profile,
    robinson_shen_residual,
    robinson_shen_terms,
)
from critlab.levelset import blowup_check, blowup_exponent, f_functional, lojasiewicz_fit, monotonicity_check
from critlab.solutions import BallSpec, SchwarzschildSpec, construct_ball, construct_schwarzschild, miao_tam_residual

import conftest

pytestmark = pytest.mark.acceptance


def record(k, ok, message):
    conftest.ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {k}: {message}")
    assert ok, message


def ball(space, n, r0=None):
    return construct_ball(BallSpec(SpaceForm(space), n, conftest.ball_radius(space) if r0 is None else r0))


def schwarzschild_family():
    return [construct_schwarzschild(SchwarzschildSpec(3, 1.0, 6.0)),
            construct_schwarzschild(SchwarzschildSpec(3, 1.0, 6.0, ads=True)),
            construct_schwarzschild(SchwarzschildSpec(4, 1.0, 4.0))]


def ball_family(dims=(3, 4, 5)):
    return [ball(space, n) for space in SpaceForm for n in dims]


def test_criterion_1_mean_curvature_equality():
    worst = 0.0
    for sol in ball_family():
        H = min(bc.H for bc in sol.boundary)
        bound = math.sqrt(sol.n * (sol.n - 1) / (sol.R * sol.f_max**2 + 2 * sol.n * sol.f_max))
        worst = max(worst, abs(H - bound) / bound)
        assert critical_mean_curvature(sol) == pytest.approx(bound, rel=1e-15)
    spots = [(ball("euclidean", 3).boundary[0].H, 2.0),
             (ball("spherical", 3).boundary[0].H, 2 / math.sqrt(3)),
             (ball("hyperbolic", 3).boundary[0].H, 2 / math.tanh(1.0))]
    spot_err = max(abs(a - b) / b for a, b in spots)
    record(1, worst <= 1e-9 and spot_err <= 1e-9,
           f"9 balls, max relative gap {worst:.2e}; spot values H = 2, 2/sqrt3, 2coth1 to {spot_err:.2e}")


def test_criterion_2_area_volume_equality():
    worst = 0.0
    for n in (3, 4, 5, 6):
        res = area_volume_bound(ball("euclidean", n))
        worst = max(worst, abs(res.margin) / res.bound_value)
    three = area_volume_bound(ball("euclidean", 3))
    ok = worst <= 1e-9 and abs(three.attained_value - 3) <= 1e-12 and abs(three.bound_value - 3) <= 1e-12
    record(2, ok, f"Euclidean n=3..6 max relative gap {worst:.2e}; n=3 gives "
                  f"{three.attained_value:.12g} = {three.bound_value:.12g}")


def test_criterion_3_boundary_area_equality():
    worst = 0.0
    for sol in ball_family((3, 4, 5, 6)):
        res = boundary_area_estimate(sol)[0]
        worst = max(worst, abs(res.margin) / res.bound_value)
    main, gb, _ = boundary_area_estimate(ball("euclidean", 3))
    ok = (worst <= 1e-8 and abs(main.attained_value - 4 * math.pi) <= 1e-12
          and abs(main.bound_value - 4 * math.pi) <= 1e-12 and abs(gb.attained_value - 8 * math.pi) <= 1e-12)
    record(3, ok, f"12 balls, max relative gap {worst:.2e}; area 4pi on both sides; Gauss-Bonnet "
                  f"{gb.attained_value:.12g} = 8pi")


def test_criterion_4_system_residuals():
    balls = max(max(miao_tam_residual(s)) for s in ball_family((3, 4, 5, 6)))
    bh = [miao_tam_residual(s) for s in schwarzschild_family()]
    bh_max = max(max(r) for r in bh)
    tangential = max(r[1] for r in bh)
    ok = balls < 1e-12 and bh_max < 1e-6 and tangential < 1e-6
    record(4, ok, f"balls {balls:.2e} < 1e-12; Schwarzschild {bh_max:.2e} < 1e-6; "
                  f"tangential consistency {tangential:.2e}")


def test_criterion_5_robinson_shen():
    balls = max(robinson_shen_residual(s, 0.05 * s.f_max) for s in ball_family())
    spec = SchwarzschildSpec(3, 1.0, 6.0)
    coarse, fine = (construct_schwarzschild(spec, g) for g in (1024, 2048))
    r_coarse = robinson_shen_residual(coarse, 0.05 * coarse.f_max)
    r_fine = robinson_shen_residual(fine, 0.05 * fine.f_max)
    _, lhs, rhs = robinson_shen_terms(fine, 0.05 * fine.f_max)
    order = math.log2(r_coarse / r_fine)
    ok = balls < 1e-10 and r_fine < 1e-6 and 1.8 <= order <= 2.2 and np.max(np.abs(rhs)) > 0
    record(5, ok, f"balls {balls:.2e}; Schwarzschild {r_fine:.2e} at f >= 0.05 f_max; "
                  f"refinement order {order:.3f}")


def test_criterion_6_phi():
    spreads = []
    for sol in ball_family():
        prof = phi_profile(sol)
        spreads.append(prof.spread / abs(prof.phi_at_max))
    e = phi_profile(ball("euclidean", 3)).phi_at_max
    s = phi_profile(ball("spherical", 3)).phi_at_max
    bh = construct_schwarzschild(SchwarzschildSpec(3, 1.0, 6.0))
    prof = phi_profile(bh, 0.05 * bh.f_max)
    gap = maximum_principle_gap(bh, prof)
    ok = (max(spreads) <= 1e-8 and abs(e - 0.25) <= 1e-12 and abs(s - 1) <= 1e-12
          and prof.spread > 1e-6 and gap <= 1e-8)
    record(6, ok, f"ball spread {max(spreads):.2e}; Phi = {e:.12g}, {s:.12g}; Schwarzschild spread "
                  f"{prof.spread:.3g}, interior max - boundary max = {gap:.3g}")


def test_criterion_7_divergence_balance():
    bh = divergence_balance(construct_schwarzschild(SchwarzschildSpec(3, 1.0, 6.0)))
    zero = max(max(abs(r.lhs), abs(r.rhs)) for r in map(divergence_balance, ball_family()))
    ok = bh.residual <= 1e-5 and bh.lhs > 0 and bh.rhs > 0 and zero == 0.0
    record(7, ok, f"Schwarzschild {bh.lhs:.10g} vs {bh.rhs:.10g} (relative {bh.residual:.2e}); "
                  f"balls max |side| = {zero}")


def test_criterion_8_gradient_bound(monkeypatch):
    worst = 0.0
    for sol in ball_family((3, 4, 5, 6)):
        grad2, h = gradient_bound_profile(sol)
        worst = max(worst, float(np.max(np.abs(grad2 - h))))
        assert gradient_bound_check(sol, sol.components[0]).equality
    bhs = schwarzschild_family()
    hyp = [gradient_hypothesis(s, c) for s in bhs for c in s.components]
    monkeypatch.setattr(est, "gradient_hypothesis", lambda *a, **k: True)
    tripped = gradient_bound_check(bhs[0], bhs[0].components[0]).status == "fail"
    ok = worst <= 1e-10 and not any(hyp) and tripped
    record(8, ok, f"ball equality residual {worst:.2e}; hypothesis false on {hyp.count(False)}/{len(hyp)} "
                  f"Schwarzschild components; tripwire fires: {tripped}")


def test_criterion_9_F_functional():
    e = f_functional(ball("euclidean", 3), ball("euclidean", 3).components[0])
    spreads = [f_functional(s, s.components[0]).relative_spread for s in ball_family()]
    mono = [monotonicity_check(f_functional(s, s.components[0]), gradient_hypothesis(s, s.components[0]))
            for s in ball_family()]
    dichotomy = [blowup_check(s, c).passed for s in ball_family() + schwarzschild_family() for c in s.components]
    bh = construct_schwarzschild(SchwarzschildSpec(3, 1.0, 6.0))
    exponents = [blowup_exponent(bh, c) for c in bh.components]
    exp_ok = all(abs(x + 0.5) <= 0.1 for x in exponents)
    ok = (max(spreads) <= 1e-6 and abs(e.F_values[0] - 16 * math.pi) <= 1e-6 * 16 * math.pi
          and all(m.passed for m in mono) and all(dichotomy) and exp_ok)
    record(9, ok, f"ball spread {max(spreads):.2e}, F = {e.F_values[0]:.10g}; monotone {sum(m.passed for m in mono)}"
                  f"/{len(mono)}; dichotomy {sum(dichotomy)}/{len(dichotomy)}; n=3 tail exponents "
                  + ", ".join(f"{x:.3f}" for x in exponents) + " vs -0.5 +- 0.1")


def test_criterion_10_lojasiewicz():
    thetas = [lojasiewicz_fit(s, c).theta_hat
              for s in ball_family() + schwarzschild_family() for c in s.components]
    ok = all(0.9 <= t <= 1.1 for t in thetas)
    record(10, ok, f"{len(thetas)} fits in [{min(thetas):.4f}, {max(thetas):.4f}]")


CLI_EXAMPLES = [
    (["verify", "ball", "--space", "euclidean", "--dim", "3", "--radius", "1"], 0),
    (["verify", "ball", "--space", "spherical", "--dim", "3", "--radius", "1.6"], 2),
    (["verify", "schwarzschild", "--dim", "3", "--mass", "1", "--r1", "2.2", "--r2", "6"], 0),
]


def test_criterion_11_cli():
    codes, stable = [], True
    for argv, _ in CLI_EXAMPLES:
        runs = [subprocess.run([sys.executable, "-m", "critlab.cli", *argv], capture_output=True)
                for _ in range(2)]
        codes.append(runs[0].returncode)
        stable = stable and runs[0].stdout == runs[1].stdout and runs[0].returncode == runs[1].returncode
    expected = [c for _, c in CLI_EXAMPLES]
    record(11, codes == expected and stable, f"exit codes {codes} (expected {expected}); byte-identical reruns: {stable}")
