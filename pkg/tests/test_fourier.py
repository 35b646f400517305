import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gkdv_lab.fourier import (FieldError, SpectralField, dyadic_slope, free_flow, from_modes,
                              power, project, random_sobolev, sobolev_norm, translate,
                              zero_field)

COS = from_modes([(1, 0.5)])


def hermitian(arr):
    M = len(arr) // 2
    return np.allclose(arr[:M][::-1], np.conj(arr[M + 1:]), atol=1e-14)


fields = st.builds(lambda n, seed, s: random_sobolev(s, n, seed),
                   st.integers(1, 24), st.integers(0, 10_000), st.floats(0.0, 2.0))


def test_from_modes_completion():
    u = from_modes([(1, 0.5)])
    assert u.coeff(-1) == 0.5 and u.N == 1
    v = from_modes([(1, 0.5), (-1, 0.5)])
    assert np.array_equal(u.pos, v.pos)
    w = from_modes([(-3, 1 + 2j)])
    assert w.coeff(3) == 1 - 2j


@pytest.mark.parametrize("entries, msg", [
    ([(0, 1)], "zero mode"),
    ([(1, 1), (1, 2)], "duplicate"),
    ([(2, 1j), (-2, 1j)], "conjugate"),
])
def test_from_modes_errors(entries, msg):
    with pytest.raises(FieldError, match=msg):
        from_modes(entries)


def test_nonfinite_rejected():
    with pytest.raises(FieldError):
        SpectralField([np.nan])


def test_power_cos():
    p2 = power(COS, 2)
    assert np.isclose(p2.coeff(0), 0.5) and np.isclose(p2.coeff(2), 0.25)
    assert np.isclose(p2.coeff(1), 0)
    p3 = power(COS, 3)
    assert np.isclose(p3.coeff(1), 3 / 8) and np.isclose(p3.coeff(-3), 1 / 8)
    p1 = power(COS, 1)
    assert p1.mean == 0 and np.array_equal(p1.mean_zero().pos, COS.pos)


def test_power_against_direct_convolution():
    u = random_sobolev(0.5, 7, 3)
    c = u.full()
    ref = np.convolve(np.convolve(c, c), c)
    got = power(u, 3).full()
    assert np.allclose(got, ref, atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(fields, st.integers(1, 4))
def test_power_hermitian_and_real_mean(u, p):
    pw = power(u, p)
    assert hermitian(pw.full())
    assert pw.coeffs[0].imag == 0


def test_sobolev_norm_examples():
    assert np.isclose(sobolev_norm(COS, 0), 1 / np.sqrt(2))
    assert np.isclose(sobolev_norm(COS, 1), 1.0)
    assert sobolev_norm(zero_field(5), 3) == 0


def test_project_examples():
    u = from_modes([(1, 0.5), (5, 0.5)])
    assert np.allclose(project(u, 2).pos, COS.with_cutoff(5).pos)
    assert np.all(project(COS, 1, "high").pos == 0)
    with pytest.raises(ValueError):
        project(u, 2, "middle")


@settings(max_examples=40, deadline=None)
@given(fields, st.integers(0, 30))
def test_project_partition_and_idempotence(u, K):
    lo, hi = project(u, K), project(u, K, "high")
    assert np.array_equal((lo + hi).pos, u.pos)
    assert np.array_equal(project(lo, K).pos, lo.pos)


def test_free_flow_plane_wave():
    # cos(x + t) solves u_t + u_xxx = 0
    t = 0.37
    assert np.allclose(free_flow(COS, t).pos, translate(COS, t).pos)
    x = np.linspace(0, 2 * np.pi, 9, endpoint=False)
    L = 9
    assert np.allclose(free_flow(COS, t).to_grid(L), np.cos(x + t))


def test_translate_examples():
    assert np.allclose(translate(COS, np.pi / 2).to_grid(8),
                       -np.sin(np.linspace(0, 2 * np.pi, 8, endpoint=False)))
    u = random_sobolev(1, 20, 4)
    assert np.allclose(translate(u, 2 * np.pi).pos, u.pos, atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(fields, st.floats(-10, 10), st.floats(-3, 3))
def test_flows_preserve_norms(u, t, s):
    n = sobolev_norm(u, s)
    assert np.isclose(sobolev_norm(free_flow(u, t), s), n, rtol=1e-12)
    assert np.isclose(sobolev_norm(translate(u, t), s), n, rtol=1e-12)
    assert np.allclose(free_flow(free_flow(u, t), -t).pos, u.pos, atol=1e-14)


def test_random_sobolev_profile():
    a = random_sobolev(1.0, 256, 5)
    b = random_sobolev(1.0, 256, 5)
    assert np.array_equal(a.pos, b.pos)
    # <k> flattens the first blocks, so start the fit at k = 4
    assert abs(dyadic_slope(a, kmin=4) - (-1.55)) < 0.1
    one = random_sobolev(1.0, 1, 0)
    assert np.isclose(abs(one.pos[0]), 2 ** (-(1.55) / 2))


def test_dyadic_slope_needs_blocks():
    assert np.isnan(dyadic_slope(random_sobolev(1, 8, 0)))


def test_grid_too_coarse():
    with pytest.raises(FieldError):
        COS.to_grid(2)


def test_arithmetic_pads_and_rejects_complex_scalar():
    u = COS + from_modes([(3, 1.0)])
    assert u.N == 3 and u.coeff(1) == 0.5
    with pytest.raises(FieldError):
        COS * 1j
