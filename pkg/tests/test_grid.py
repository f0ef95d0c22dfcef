import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pucp.grid import (ComplexField, DiskGrid, RealField, VectorField2, make_disk_grid,
                       norm_on_disc, wirtinger_derivatives)


def test_spacing_examples():
    assert make_disk_grid(256, 8, 32).spacing == 0.125
    assert make_disk_grid(16, 1, 4).spacing == 0.25


@pytest.mark.parametrize("n", [100, 8, 0])
def test_rejects_bad_sample_count(n):
    with pytest.raises(ValueError, match="power of two"):
        make_disk_grid(n, 8, 32)


def test_rejects_insufficient_padding():
    with pytest.raises(ValueError, match="embed_side"):
        make_disk_grid(256, 8, 31)


def test_mask_is_strict_disc(grid256):
    g = grid256
    assert np.array_equal(g.mask, np.abs(g.z) < 8)
    # a sample exactly on the circle is excluded
    assert abs(g.z[g.index_of(8 + 0j)] - 8) < 1e-12
    assert not g.mask[g.index_of(8 + 0j)]


def test_taper_is_one_on_domain_and_zero_far_out(grid256):
    g = grid256
    assert np.all(g.taper[g.mask] == 1.0)
    assert np.all(g.taper[g.radius_from_center >= 12] == 0.0)


def test_fields_are_immutable_and_checked(grid256):
    f = RealField(grid256, grid256.x)
    with pytest.raises(ValueError):
        f.samples[0, 0] = 1.0
    bad = np.zeros(grid256.shape)
    bad[128, 128] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        RealField(grid256, bad)
    # non-finite values outside the disk are tolerated
    out = np.zeros(grid256.shape)
    out[0, 0] = np.inf
    RealField(grid256, out)
    V = VectorField2(grid256, grid256.x, grid256.y)
    assert np.allclose(V.modulus, np.abs(grid256.z))


def _inner(g, r=6.0):
    return g.radius_from_center < r


# Polynomials are tapered before spectral differentiation; the taper's
# resolution caps spectral accuracy near 1e-4 relative at n = 256.
TOL = {"spectral": 1e-3, "centered_difference": 1e-11, "fourth_order": 1e-11}


@pytest.mark.parametrize("method", ["spectral", "centered_difference", "fourth_order"])
def test_wirtinger_of_z_squared(grid256, method):
    g = grid256
    dz, dzb = wirtinger_derivatives(ComplexField(g, g.z ** 2), method)
    m = _inner(g)
    assert np.max(np.abs(dz.samples - 2 * g.z)[m]) <= TOL[method] * 12
    assert np.max(np.abs(dzb.samples)[m]) <= TOL[method] * 12


@pytest.mark.parametrize("method", ["spectral", "centered_difference", "fourth_order"])
def test_wirtinger_of_zbar(grid256, method):
    g = grid256
    dz, dzb = wirtinger_derivatives(ComplexField(g, np.conj(g.z)), method)
    m = _inner(g)
    assert np.max(np.abs(dz.samples)[m]) < TOL[method]
    assert np.max(np.abs(dzb.samples - 1)[m]) < TOL[method]


@pytest.mark.parametrize("method", ["spectral", "centered_difference", "fourth_order"])
def test_wirtinger_of_re_z_squared(grid256, method):
    # Re z^2 = (z^2 + zbar^2) / 2, so d/dz = z and d/dzbar = zbar
    g = grid256
    dz, dzb = wirtinger_derivatives(ComplexField(g, (g.z ** 2).real), method)
    m = _inner(g)
    assert np.max(np.abs(dz.samples - g.z)[m]) < TOL[method] * 6
    assert np.max(np.abs(dzb.samples - np.conj(g.z))[m]) < TOL[method] * 6


def test_fourth_order_is_exact_on_cubics(grid256):
    # second-order differences leave an h^2 floor on z^3; the five-point stencil does not
    g = grid256
    m = _inner(g)
    v = RealField(g, (g.z ** 3).real)
    exact = 1.5 * g.z ** 2
    dz2, _ = wirtinger_derivatives(v, "centered_difference")
    dz4, dzb4 = wirtinger_derivatives(v, "fourth_order")
    assert np.max(np.abs(dz2.samples - exact)[m]) == pytest.approx(g.spacing ** 2 / 2, rel=1e-6)
    assert np.max(np.abs(dz4.samples - exact)[m]) <= 1e-10
    assert np.max(np.abs(dzb4.samples - np.conj(exact))[m]) <= 1e-10


def test_spectral_is_exact_on_decaying_fields(grid256):
    g = grid256
    f = np.exp(-np.abs(g.z) ** 2)
    dz, dzb = wirtinger_derivatives(ComplexField(g, f), "spectral")
    assert np.max(np.abs(dz.samples + np.conj(g.z) * f)) < 1e-10
    assert np.max(np.abs(dzb.samples + g.z * f)) < 1e-10


def test_complex_gradient_of_real_field(grid256):
    g = grid256
    v = RealField(g, g.x ** 2 * g.y)
    dz, _ = wirtinger_derivatives(v, "centered_difference")
    G = 2 * g.x * g.y - 1j * g.x ** 2
    assert np.max(np.abs(2 * dz.samples - G)[_inner(g)]) < 1e-10


def test_difference_method_is_second_order():
    # dzbar of a holomorphic field is O(h^2) in L^2
    errs = []
    for n in (64, 128, 256):
        g = make_disk_grid(n, 8.0)
        f = ComplexField(g, np.exp(-0.05 * g.z ** 2))
        _, dzb = wirtinger_derivatives(f, "centered_difference")
        m = _inner(g, 4.0)
        errs.append(np.sqrt(np.sum(np.abs(dzb.samples)[m] ** 2) * g.spacing ** 2))
        assert errs[-1] <= 0.2 * g.spacing ** 2
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 1.9)


def test_unknown_method(grid256):
    with pytest.raises(ValueError):
        wirtinger_derivatives(RealField(grid256, grid256.x), "forward")


def test_norm_examples(grid256):
    g = grid256
    one = RealField(g, np.ones(g.shape))
    assert norm_on_disc(one, math.inf, 3.0, 1 + 1j) == 1.0
    modz = RealField(g, np.abs(g.z))
    assert abs(norm_on_disc(modz, math.inf, 1.0, 0) - 1) <= g.spacing
    assert abs(norm_on_disc(one, 2, 2.0) - math.sqrt(4 * math.pi)) / math.sqrt(4 * math.pi) < 0.01


def test_norm_errors(grid256):
    one = RealField(grid256, np.ones(grid256.shape))
    with pytest.raises(ValueError, match="escapes"):
        norm_on_disc(one, 2, 2.0, 7.0)
    with pytest.raises(ValueError, match="fewer than 4"):
        norm_on_disc(one, 2, 0.1)
    with pytest.raises(ValueError):
        norm_on_disc(one, 0.5, 1.0)


def test_indicator_norm_converges_at_first_order():
    errs = []
    for n in (64, 128, 256, 512):
        g = make_disk_grid(n, 8.0)
        one = RealField(g, np.ones(g.shape))
        r = 2.3
        errs.append(abs(norm_on_disc(one, 2, r) - math.sqrt(math.pi) * r))
    for e, n in zip(errs, (64, 128, 256, 512)):
        assert e <= 2 * (32 / n)


@settings(max_examples=25, deadline=None)
@given(r1=st.floats(0.5, 3.0), dr=st.floats(0.0, 4.0), p=st.sampled_from([1.0, 2.0, 3.5, math.inf]))
def test_norm_monotone_in_radius(grid256, r1, dr, p):
    g = grid256
    f = ComplexField(g, np.sin(g.x) + 1j * g.y ** 2)
    assert norm_on_disc(f, p, r1) <= norm_on_disc(f, p, r1 + dr) + 1e-12


@settings(max_examples=25, deadline=None)
@given(phase=st.floats(0, 2 * math.pi))
def test_sup_norm_unimodular_invariance(grid256, phase):
    g = grid256
    f = ComplexField(g, np.cos(g.x) + 1j * g.y)
    rot = ComplexField(g, np.exp(1j * phase) * f.samples)
    absf = RealField(g, np.abs(f.samples))
    a = norm_on_disc(f, math.inf, 2.0)
    assert a == pytest.approx(norm_on_disc(rot, math.inf, 2.0), rel=1e-15)
    assert a == norm_on_disc(absf, math.inf, 2.0)


def test_grid_equality():
    a = make_disk_grid(64, 2.0)
    assert a.same_as(DiskGrid(64, 2.0, 8.0))
    assert not a.same_as(make_disk_grid(64, 2.0, 9.0))
