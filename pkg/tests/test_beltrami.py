import json
import math

import numpy as np
import pytest
import scipy.ndimage as ndi

from pucp.beltrami import (NeumannDivergence, OmegaOverflow, assemble_coefficients, beltrami_constants,
                           choose_delta, complex_gradient_F, conjugate_function, general_a_coefficients,
                           neumann_solve, normalize_f, quasiregularity_check, reduce_solution,
                           save_reduction, w12_difference_quotient_check)
from pucp.fieldio import read_field
from pucp.grid import ComplexField, RealField, VectorField2, make_disk_grid, wirtinger_derivatives
from pucp.manufactured import manufactured_instance
from pucp.solver import PLaplaceProblem, solve_dirichlet


def l2(a, m):
    return math.sqrt(np.sum(np.abs(a[m]) ** 2))


# ---------------------------------------------------------------- constants


@pytest.mark.parametrize("p,expected", [(2.0, (0.0, 1.0, math.inf)), (4.0, (1 / 3, 2.0, 4.0)),
                                        (1.5, (0.2, 1.5, 6.0))])
def test_beltrami_constants(p, expected):
    k, K, p0 = beltrami_constants(p)
    assert k == pytest.approx(expected[0], abs=1e-15)
    assert K == pytest.approx(expected[1], abs=1e-15)
    assert p0 == pytest.approx(expected[2], abs=1e-12) if math.isfinite(expected[2]) else math.isinf(p0)


@pytest.mark.parametrize("p", [1.2, 1.5, 2.0, 3.0, 4.0, 8.0])
def test_general_a_matches_closed_form(p):
    c = general_a_coefficients(p)
    assert np.max(np.abs(np.subtract(c["general"], c["closed"]))) <= 1e-12


@pytest.mark.parametrize("p,q,delta", [(4.0, 5.0, 3.0), (4.0, 4.0, 3.0), (2.0, 7.0, 7.0), (1.5, 4.0, 4.0),
                                       (1.5, 7.0, 4.0)])
def test_choose_delta(p, q, delta):
    assert choose_delta(p, q) == pytest.approx(delta)


def test_choose_delta_window():
    # delta lies in (2, 1 + 1/k) whenever k > 0
    for p in (1.2, 1.5, 3.0, 4.0, 8.0):
        k, _, p0 = beltrami_constants(p)
        for q in (max(2.0, p), max(2.0, p) + 0.5, 50.0):
            d = choose_delta(p, q)
            assert (d == q) or (2 < d < p0)
            assert d < p0 or k == 0


def test_choose_delta_spec_example_with_low_q():
    # the case-split example p = 4, q = 3 lies outside q >= max(2, p)
    with pytest.raises(ValueError):
        choose_delta(4.0, 3.0)


# ---------------------------------------------------------------- F


def test_complex_gradient_examples(grid256):
    g = grid256
    inner = g.radius_from_center < 7
    for p in (1.5, 2.0, 4.0):
        F = complex_gradient_F(RealField(g, g.x), p)
        assert np.allclose(F.samples[inner], 1.0, atol=1e-12)
    v2 = RealField(g, (g.z ** 2).real)
    assert np.allclose(complex_gradient_F(v2, 2.0).samples[inner], 2 * g.z[inner], atol=1e-10)
    assert np.allclose(complex_gradient_F(v2, 4.0).samples[inner], 4 * g.z[inner] * np.abs(g.z[inner]),
                       atol=1e-9)
    with pytest.raises(ValueError):
        complex_gradient_F(v2, 1.0)


def test_zero_gradient_gives_zero_F(grid256):
    F = complex_gradient_F(RealField(grid256, np.full(grid256.shape, 2.0)), 1.5)
    assert not np.any(F.samples)


# ---------------------------------------------------------------- coefficients


def test_p2_without_drift_has_no_coefficients(grid256):
    s = assemble_coefficients(RealField(grid256, (grid256.z ** 3).real), None, 2.0, "drift")
    for q in (s.q1, s.q2, s.q3, s.o1):
        assert not np.any(q.samples)
    assert s.k == 0 and s.K == 1 and math.isinf(s.p0)


def test_p4_affine_coefficients(grid256):
    s = assemble_coefficients(RealField(grid256, grid256.x), None, 4.0, "drift")
    m = s.unmasked
    assert np.allclose(s.q1.samples[m], -4 / 15, atol=1e-12)
    assert np.allclose(s.q2.samples[m], 1 / 15, atol=1e-12)
    assert s.masked_fraction == 0


def test_nonlinear_p2_unit_weight_is_conformal(grid256):
    g = grid256
    s = assemble_coefficients(RealField(g, g.x), RealField(g, np.ones(g.shape)), 2.0, "weighted_nonlinear")
    assert not np.any(s.mu.samples)


def test_weight_must_be_positive(grid256):
    with pytest.raises(ValueError, match="positive"):
        assemble_coefficients(RealField(grid256, grid256.x), RealField(grid256, np.zeros(grid256.shape)),
                              3.0, "weighted_lipschitz")
    with pytest.raises(ValueError, match="variant"):
        assemble_coefficients(RealField(grid256, grid256.x), None, 3.0, "other")


@pytest.mark.parametrize("p", [1.5, 3.0, 4.0])
def test_ellipticity_bound_pointwise(grid256, p):
    inst = manufactured_instance("drifted", p, grid256)
    s = assemble_coefficients(inst.reference, inst.problem.drift, p, "drift")
    total = np.abs(s.q1.samples) + np.abs(s.q2.samples)
    assert np.max(total[s.unmasked]) <= s.k + 1e-12
    assert np.max(np.abs(s.o1.samples)) <= s.k + 1e-12
    assert s.k == pytest.approx(beltrami_constants(p)[0])


def _equation_residual(s, F):
    Fz, Fzb = (f.samples for f in wirtinger_derivatives(F, "centered_difference"))
    return Fzb - s.q1.samples * Fz - s.q2.samples * np.conj(Fz) - s.q3.samples * F.samples


@pytest.mark.parametrize("p", [1.5, 4.0])
def test_drift_coefficients_satisfy_the_beltrami_equation(p):
    # residual of F_zbar = q1 F_z + q2 conj(F_z) + q3 F on exact samples is
    # truncation error only: second order under refinement
    res = []
    for n in (128, 256):
        g = make_disk_grid(n, 8.0)
        inst = manufactured_instance("drifted", p, g)
        s = assemble_coefficients(inst.reference, inst.problem.drift, p, "drift")
        m = s.unmasked & (g.radius_from_center < 7)
        r = _equation_residual(s, s.F)
        res.append(l2(r, m) * g.spacing)
        # the drift term is order one, so the residual is much smaller than q3 F
        assert l2(r, m) < 0.05 * l2(s.q3.samples * s.F.samples, m)
    assert res[0] / res[1] > 3.5


def test_weighted_coefficients_satisfy_the_beltrami_equation():
    res = []
    for n in (128, 256):
        g = make_disk_grid(n, 8.0)
        inst = manufactured_instance("weighted", 3.0, g)
        s = assemble_coefficients(inst.reference, inst.problem.weight, 3.0, "weighted_lipschitz")
        m = s.unmasked & (g.radius_from_center < 7)
        r = _equation_residual(s, s.F)
        res.append(l2(r, m) * g.spacing)
        assert l2(r, m) < 0.05 * l2(s.q3.samples * s.F.samples, m)
    assert res[0] / res[1] > 3.5


def test_nonlinear_coefficient_satisfies_its_equation(solved):
    prob, v, _ = solved.weighted(3.0)
    s = assemble_coefficients(v, prob.weight, 3.0, "weighted_nonlinear")
    Fz, Fzb = (f.samples for f in wirtinger_derivatives(s.F, "centered_difference"))
    m = s.unmasked & (prob.grid.radius_from_center < 7)
    assert l2(Fzb - s.mu.samples * np.conj(Fz), m) < 0.02 * l2(Fzb, m)
    assert 0 < s.k < 1


# ---------------------------------------------------------------- Neumann and normalisation


def test_neumann_with_zero_o1_is_one_step(grid256, plan256):
    s = assemble_coefficients(RealField(grid256, grid256.x), None, 2.0, "drift")
    rhs = ComplexField(grid256, np.where(grid256.mask, np.exp(-np.abs(grid256.z) ** 2), 0))
    g, info = neumann_solve(s, plan256, rhs=rhs)
    assert info["iterations"] == 1
    assert np.array_equal(g.samples, rhs.samples)


def test_neumann_contraction_p4(solved, plan256):
    inst, v, _ = solved.drifted(4.0)
    red = reduce_solution(v, inst.problem.drift, 4.0, plan=plan256, q=6.0)
    hist = np.array(red.contraction_history)
    assert hist.size >= 3
    assert np.max(hist) <= 0.34


def test_neumann_manufactured_recovery(solved, plan256):
    from pucp.singular import beurling_transform

    inst, v, _ = solved.drifted(4.0)
    s = assemble_coefficients(v, inst.problem.drift, 4.0, "drift", q=6.0)
    g = plan256.grid
    gstar = np.where(g.mask, np.exp(-0.5 * np.abs(g.z - 1) ** 2) * (1 + 0.3j * g.y), 0)
    Sg = beurling_transform(plan256, ComplexField(g, gstar)).samples
    rhs = ComplexField(g, np.where(g.mask, gstar - s.o1.samples * Sg, 0))
    sol, info = neumann_solve(s, plan256, rhs=rhs)
    assert l2(sol.samples - gstar, g.mask) / l2(gstar, g.mask) <= 1e-7
    assert info["residual"] <= info["certificate_bound"]


def test_neumann_reports_divergence(grid256, plan256):
    import dataclasses

    s = assemble_coefficients(RealField(grid256, grid256.x), None, 4.0, "drift")
    bad = dataclasses.replace(s, o1=ComplexField(grid256, np.where(grid256.mask, 1.5, 0)),
                              o2=ComplexField(grid256, np.where(grid256.mask, 1.0, 0)))
    with pytest.raises(NeumannDivergence):
        neumann_solve(bad, plan256, max_iter=50)


def test_normalize_zero_g(grid256, plan256):
    F = ComplexField(grid256, np.where(grid256.mask, grid256.z + 2, 0))
    omega, f, norms = normalize_f(F, ComplexField(grid256, np.zeros(grid256.shape)), plan256)
    assert not np.any(omega.samples)
    assert np.array_equal(f.samples, F.samples)
    assert norms["omega_sup"] == 0


def test_normalize_disc_indicator(grid512, plan512):
    from test_singular import cell_averaged_disc

    g = grid512
    F = ComplexField(g, np.where(g.mask, 1.0, 0))
    omega, f, _ = normalize_f(F, cell_averaged_disc(g), plan512)
    m = g.radius_from_center < 1 - 4 * g.spacing
    assert np.max(np.abs(f.samples - np.exp(-np.conj(g.z)))[m]) <= 1e-2


def test_normalize_overflow_guard(grid256, plan256):
    from test_singular import cell_averaged_disc

    F = ComplexField(grid256, np.where(grid256.mask, 1.0, 0))
    big = ComplexField(grid256, 100 * cell_averaged_disc(grid256).samples)
    with pytest.raises(OmegaOverflow) as err:
        normalize_f(F, big, plan256)
    assert err.value.norm > 50


def test_pipeline_representation_identity(solved, plan256):
    inst, v, _ = solved.drifted(4.0)
    red = reduce_solution(v, inst.problem.drift, 4.0, plan=plan256, q=6.0)
    assert red.measured_ratios["representation_error"] <= 1e-10
    assert red.measured_ratios["omega_sup"] > 0


def test_save_reduction(tmp_path, solved, plan256):
    inst, v, _ = solved.drifted(4.0)
    red = reduce_solution(v, inst.problem.drift, 4.0, plan=plan256, q=6.0)
    d = save_reduction(red, tmp_path / "red")
    for name in ("F", "g", "omega", "f"):
        back = read_field(d / f"{name}.pucp", expect=ComplexField)
        assert np.array_equal(back.samples, getattr(red, name).samples)
    summary = json.loads((d / "summary.json").read_text())
    assert summary["k"] == pytest.approx(1 / 3)
    assert summary["delta"] == pytest.approx(3.0)
    assert "masked_fraction" in summary and "omega_sup" in summary


# ---------------------------------------------------------------- quasiregularity


def test_holomorphic_ratio_is_zero(grid256):
    g = grid256
    rep = quasiregularity_check(ComplexField(g, g.z ** 2), 0.0)
    assert rep["measured"] < 1e-10 and rep["passed"]


def test_radial_stretch_modulus(grid256):
    g = grid256
    z = g.z
    f = np.where(z == 0, 0, z * np.abs(z) ** (1 / 2 - 1))
    rep = quasiregularity_check(ComplexField(g, f), 1 / 3)
    assert rep["quantiles"]["0.5"] == pytest.approx(1 / 3, abs=0.01)
    assert rep["measured"] == pytest.approx(1 / 3, abs=0.01)


@pytest.mark.parametrize("kind,p", [("drifted", 4.0), ("drifted", 3.0), ("drifted", 1.5),
                                    ("weighted", 3.0), ("weighted", 1.5)])
def test_pipeline_is_quasiregular(solved, plan256, kind, p):
    if kind == "drifted":
        inst, v, _ = solved.drifted(p)
        red = reduce_solution(v, inst.problem.drift, p, plan=plan256)
    else:
        prob, v, _ = solved.weighted(p)
        red = reduce_solution(v, prob.weight, p, "weighted_lipschitz", plan=plan256)
    k = beltrami_constants(p)[0]
    rep = quasiregularity_check(red.f, k, unmasked=red.system.unmasked)
    assert rep["passed"], rep
    assert rep["measured"] <= k + 0.02


def test_quasiregularity_empty_set(grid256):
    with pytest.raises(ValueError):
        quasiregularity_check(ComplexField(grid256, grid256.z), 0.0,
                              unmasked=np.zeros(grid256.shape, bool))


# ---------------------------------------------------------------- W^{1,2}


def test_w12_flat_for_linear_map(grid256):
    g = grid256
    hs = [g.spacing * 2 ** j for j in range(4)]
    rep = w12_difference_quotient_check(ComplexField(g, g.z), hs)
    assert rep["passed"]
    assert np.ptp(rep["quotients"]) / np.mean(rep["quotients"]) < 1e-10


def test_w12_flat_for_pipeline_F(solved):
    inst, v, _ = solved.drifted(3.0)
    F = complex_gradient_F(v, 3.0)
    hs = [v.grid.spacing * 2 ** j * 1j for j in range(4)]
    rep = w12_difference_quotient_check(F, hs)
    assert rep["passed"], rep


def test_w12_jump_fails(grid256):
    # a jump across a line has L^2 quotients of order |h|^{-1/2}
    g = grid256
    F = ComplexField(g, np.where(g.x > 0.3, 1.0 + 0j, 0.0))
    rep = w12_difference_quotient_check(F, [g.spacing * 2 ** j for j in range(4)])
    assert not rep["passed"]
    assert rep["slope"] == pytest.approx(-0.5, abs=0.1)


def test_w12_offset_validation(grid256):
    F = ComplexField(grid256, grid256.z)
    with pytest.raises(ValueError):
        w12_difference_quotient_check(F, [2.0])
    with pytest.raises(ValueError):
        w12_difference_quotient_check(F, [grid256.spacing * 0.5])


# ---------------------------------------------------------------- conjugate function


def test_conjugate_cauchy_riemann(grid256):
    g = grid256
    one = RealField(g, np.ones(g.shape))
    inner = g.radius_from_center < 7
    w = conjugate_function(RealField(g, g.x), one, 2.0)
    assert np.max(np.abs(w.samples - g.y)[inner]) < 1e-9
    w = conjugate_function(RealField(g, (g.z ** 2).real), one, 2.0)
    # the boundary row of centered differences is one-sided and first order
    assert np.max(np.abs(w.samples - 2 * g.x * g.y)[inner]) < 1e-2


def test_conjugate_anchor_is_zero(solved):
    prob, v, _ = solved.weighted(1.5)
    w, rep = conjugate_function(v, prob.weight, 1.5, return_report=True)
    i, j = prob.grid.index_of(rep["anchor"])
    assert w.samples[i, j] == 0
    assert rep["curl_relative"] < 0.25


def test_conjugate_rejects_non_solutions(grid256):
    g = grid256
    A = RealField(g, 1 + 0.3 * np.sin(0.4 * g.x) * np.cos(0.3 * g.y))
    bad = RealField(g, g.x + 0.05 * (g.x ** 2 + g.y ** 2))
    with pytest.raises(ValueError, match="not a solution"):
        conjugate_function(bad, A, 1.5)


def test_conjugate_radial_annulus():
    g = make_disk_grid(512, 4.0)
    inst = manufactured_instance("radial", 1.5, g)
    dom = inst.problem.mask
    w = conjugate_function(inst.reference, None, 1.5, domain=dom)
    h = g.spacing
    wy, wx = np.gradient(w.samples, h, h)
    gx, gy = inst.exact_gradient
    gv = np.hypot(gx(g.x, g.y), gy(g.x, g.y))
    inner = ndi.binary_erosion(dom, iterations=2)
    cut = (np.abs(g.y) < 3 * h) & (g.x < 0)
    sel = inner & ~cut
    rel = np.abs(np.hypot(wx, wy) - gv ** 0.5) / gv ** 0.5
    assert np.median(rel[sel]) <= 1e-3
    assert np.quantile(rel[sel], 0.99) <= 1e-2


def test_conjugate_is_path_independent(solved):
    # the sum of edge increments around every grid cell vanishes
    prob, v, _ = solved.weighted(3.0)
    w = conjugate_function(v, prob.weight, 3.0).samples
    m = prob.grid.mask
    cell = m[:-1, :-1] & m[1:, :-1] & m[:-1, 1:] & m[1:, 1:]
    loop = (w[:-1, 1:] - w[:-1, :-1]) + (w[1:, 1:] - w[:-1, 1:]) \
        + (w[1:, :-1] - w[1:, 1:]) + (w[:-1, :-1] - w[1:, :-1])
    assert np.max(np.abs(loop[cell])) < 1e-12 * np.max(np.abs(w))


def test_p2_solution_F_is_discretely_holomorphic():
    g = make_disk_grid(256, 8.0)
    data = (g.z ** 3).real / 64 + g.x
    v, _ = solve_dirichlet(PLaplaceProblem("drift", 2.0, g, data))
    F = complex_gradient_F(v, 2.0)
    Fz, Fzb = (f.samples for f in wirtinger_derivatives(F, "centered_difference"))
    m = g.radius_from_center < 8 - 4 * g.spacing
    assert l2(Fzb, m) / l2(Fz, m) <= 1e-3


def test_reduce_solution_rejects_wrong_drift_type(grid256):
    with pytest.raises(TypeError):
        reduce_solution(RealField(grid256, grid256.x), RealField(grid256, np.ones(grid256.shape)), 3.0)
    with pytest.raises(TypeError):
        reduce_solution(RealField(grid256, grid256.x), VectorField2.zeros(grid256), 3.0, "weighted_lipschitz")
