"""Criticality classification, uniqueness, error bounds, and probes."""

import math
import random

import pytest

from plqstab import (classify_multiplier, critical_ray_probe, dqc_holds,
                     error_bound_residuals, rat, semi_isolated_probe,
                     solve_perturbed, trace_is_divergent, uniqueness_report)
from plqstab.rational import vadd, vdot, vscale, vsub
from support import (ball_sample, embed_system_full_rank,
                     embed_system_rank_drop, flat_system, parabola_system,
                     random_varsys_with_solution, scalar_system)


def test_classification_on_embedded_halfline_systems():
    a = embed_system_full_rank()
    assert not classify_multiplier(a, (0, 0), (0, 0)).critical

    b = embed_system_rank_drop()
    verdict = classify_multiplier(b, (0, 0), (0, 0))
    assert verdict.critical
    # the witness moves along the dropped primal coordinate only
    assert verdict.xi[0] == 0 and verdict.xi[1] != 0


def test_classification_across_the_parabola_multiplier_ray():
    s = parabola_system()
    for t, want in [(rat(0), False), (rat(1, 4), False), (rat(1, 2), True),
                    (rat(1), False), (rat(10), False)]:
        verdict = classify_multiplier(s, (0,), (0, t))
        assert verdict.critical == want, t


def test_classifier_rejects_non_solutions():
    s = parabola_system()
    with pytest.raises(ValueError):
        classify_multiplier(s, (1,), (0, 0))


def test_witness_scaling_is_a_witness():
    s = parabola_system()
    verdict = classify_multiplier(s, (0,), (0, rat(1, 2)))
    xi, eta = verdict.xi, verdict.eta
    pen = s.penalty
    kcone = pen.critical_cone_at(s.phi.eval((0,)), (0, rat(1, 2)))
    amat = s.psi_jacobian_x((0,), (0, rat(1, 2)))
    gmat = s.phi.jacobian_at((0,))
    for t in (rat(2), rat(1, 3), rat(7, 5)):
        txi, teta = vscale(t, xi), vscale(t, eta)
        lhs = vadd(amat.matvec(txi), gmat.rmatvec(teta))
        assert all(v == 0 for v in lhs)
        resid = vsub(gmat.matvec(txi), pen.B.matvec(teta))
        assert kcone.contains(teta)
        assert kcone.polar().contains(resid)
        assert vdot(resid, teta) == 0


def test_dqc_on_goldens():
    assert dqc_holds(embed_system_full_rank(), (0, 0), (0, 0))
    assert not dqc_holds(flat_system(), (0, 0), (0, 0))
    assert not dqc_holds(parabola_system(), (0,), (0, 1))


def test_dqc_trivial_when_adjoint_injective():
    s = scalar_system()   # DPhi = 1, kernel {0}
    assert dqc_holds(s, (0,), (0,))


def test_uniqueness_reports_on_goldens():
    r = uniqueness_report(embed_system_full_rank(), (0, 0), (0, 0))
    assert r.singleton and r.dqc and r.consistent
    r = uniqueness_report(flat_system(), (0, 0), (0, 0))
    assert not r.singleton and not r.dqc and r.consistent
    r = uniqueness_report(parabola_system(), (0,), (0, 1))
    assert not r.singleton and not r.dqc and r.consistent


def test_uniqueness_equivalence_randomized_50():
    rng = random.Random(101)
    failures = []
    for i in range(50):
        system, xbar, lam = random_varsys_with_solution(rng, n_max=4, m_max=4,
                                                        p_max=4)
        r = uniqueness_report(system, xbar, lam)
        if not r.consistent:
            failures.append(i)
    assert not failures


def test_error_bound_hand_instance():
    s = scalar_system()
    lhs, rhs_iii, rhs_iv = error_bound_residuals(
        s, (0,), (0,), (rat(1, 10),), (rat(1, 20),))
    assert abs(lhs - 0.15) < 1e-12
    assert abs(rhs_iv - 0.175) < 1e-12
    assert error_bound_residuals(s, (0,), (0,), (0,), (0,)) == (0.0, 0.0, 0.0)
    # lam outside Y: the inverse-subdifferential distance degenerates to +inf
    _, rhs_iii, _ = error_bound_residuals(s, (0,), (0,), (rat(1, 10),),
                                          (rat(-1, 20),))
    assert math.isinf(rhs_iii)


def test_error_bound_finite_ratio_at_noncritical_instances():
    rng = random.Random(103)
    for system, xbar, lam in [
            (embed_system_full_rank(), (rat(0), rat(0)), (rat(0), rat(0))),
            (parabola_system(), (rat(0),), (rat(0), rat(1))),
            (scalar_system(), (rat(0),), (rat(0),))]:
        assert not classify_multiplier(system, xbar, lam).critical
        worst = 0.0
        for _ in range(200):
            dx = ball_sample(rng, system.n)
            dl = ball_sample(rng, system.m)
            lhs, _, rhs4 = error_bound_residuals(
                system, xbar, lam, vadd(xbar, dx), vadd(lam, dl))
            if lhs == 0.0:
                continue
            assert rhs4 > 0.0, "nonzero deviation with zero residual"
            worst = max(worst, lhs / rhs4)
        assert worst < 1e8


def test_residuals_vanish_exactly_on_the_solution_graph():
    s = parabola_system()
    # every (0, (0, t)) with t >= 0 solves the unperturbed system
    for t in (rat(0), rat(1, 3), rat(2), rat(1, 2)):
        assert s.is_solution((0,), (0, t))
        lhs, rhs_iii, rhs_iv = error_bound_residuals(
            s, (0,), (0, 1), (0,), (0, t))
        assert lhs == 0.0 and rhs_iii == 0.0 and rhs_iv == 0.0
    # and conversely a non-solution has positive proximal residual
    _, _, rhs_iv = error_bound_residuals(s, (0,), (0, 1), (rat(1, 9),),
                                         (0, rat(1, 3)))
    assert rhs_iv > 0.0


def test_ray_probe_diverges_on_critical_goldens():
    s = parabola_system()
    verdict = classify_multiplier(s, (0,), (0, rat(1, 2)))
    trace = critical_ray_probe(s, (0,), (0, rat(1, 2)), verdict)
    assert trace_is_divergent(trace)
    assert trace.ratios()[-1] > 1e3
    # ratio is 1/t along this ray
    assert abs(trace.ratios()[0] - 2.0) < 1e-12

    b = embed_system_rank_drop()
    vb = classify_multiplier(b, (0, 0), (0, 0))
    tb = critical_ray_probe(b, (0, 0), (0, 0), vb)
    assert trace_is_divergent(tb)


def test_ray_probe_requires_critical_verdict():
    a = embed_system_full_rank()
    verdict = classify_multiplier(a, (0, 0), (0, 0))
    with pytest.raises(ValueError):
        critical_ray_probe(a, (0, 0), (0, 0), verdict)


def test_ray_probe_single_point_grid_not_divergent():
    s = parabola_system()
    verdict = classify_multiplier(s, (0,), (0, rat(1, 2)))
    trace = critical_ray_probe(s, (0,), (0, rat(1, 2)), verdict,
                               t_grid=[rat(1, 4)])
    assert len(trace) == 1
    assert not trace_is_divergent(trace)


def test_probe_trace_csv_and_residual_replay():
    s = parabola_system()
    verdict = classify_multiplier(s, (0,), (0, rat(1, 2)))
    trace = critical_ray_probe(s, (0,), (0, rat(1, 2)), verdict)
    csv = trace.to_csv()
    lines = csv.strip().splitlines()
    assert lines[0] == "t,p1,p2,x,lambda,lhs,rhs,ratio"
    assert len(lines) == len(trace) + 1
    for rec in trace:
        x = tuple(rat(v) for v in rec.x)
        lam = tuple(rat(v) for v in rec.lam)
        p1 = s.psi(x, lam)
        assert max(abs(float(a) - b) for a, b in zip(p1, rec.p1)) <= 1e-10


def test_solve_perturbed_examples():
    s = scalar_system()
    res = solve_perturbed(s, (0.0,), (0.0,), ((0,), (0,)))
    assert res.converged and res.residual_norm <= 1e-10
    assert res.x == (0.0,) and res.lam == (0.0,)

    res = solve_perturbed(s, (1e-3,), (0.0,), ((0,), (0,)))
    assert res.converged
    assert abs(res.x[0] - 5e-4) < 1e-12 and abs(res.lam[0] - 5e-4) < 1e-12

    # far-away inconsistent start on a system with no nearby solution
    res = solve_perturbed(s, (1.0,), (2.0,), ((1e6,), (-1e6,)), max_iter=3)
    assert not res.converged or res.residual_norm <= 1e-10


def test_semi_isolated_probe_bounded_for_noncritical():
    a = embed_system_full_rank()
    trace, modulus = semi_isolated_probe(a, (0, 0), (0, 0), grid=8)
    assert math.isfinite(modulus) and modulus > 0
    trace2, modulus2 = semi_isolated_probe(a, (0, 0), (0, 0), grid=16)
    assert math.isfinite(modulus2)
    assert modulus2 <= 4 * max(modulus, 1.0)   # stable under refinement


def test_semi_isolated_probe_blows_up_along_critical_ray():
    s = parabola_system()
    verdict = classify_multiplier(s, (0,), (0, rat(1, 2)))
    trace = critical_ray_probe(s, (0,), (0, rat(1, 2)), verdict)
    # the proof-ray perturbations themselves witness unbounded ratios
    assert trace.ratios()[-1] > 1e3


def test_semi_isolated_zero_perturbation_ratio_zero():
    s = scalar_system()
    res = solve_perturbed(s, (0.0,), (0.0,), ((0,), (0,)))
    assert res.converged
    lhs = abs(res.x[0])
    assert lhs == 0.0
