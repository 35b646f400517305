import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gkdv_lab.fourier import (BudgetExceeded, FieldError, SpectralField, from_modes, power,
                              random_sobolev, sobolev_norm)
from gkdv_lab.nonlinearity import (MultilinearSpec, PolyNonlinearity, dxP, enumerate_resonant,
                                   hl_mask, inclusion_exclusion_residual, multilinear_apply,
                                   polarize_check, resonant_full, resonant_mask, resonant_r1,
                                   resonant_r2, split_nr, sym_ik, sym_one)
from gkdv_lab.normal_form import nf_symmetric_spec

COS = from_modes([(1, 0.5)])
MATRIX = [PolyNonlinearity.monomial(2), PolyNonlinearity.monomial(3),
          PolyNonlinearity.monomial(4), PolyNonlinearity(((1.0, 3), (1.0, 4))),
          PolyNonlinearity(((0.7, 2), (-1.3, 3)))]


def brute(fields, symbol, domain, C):
    """Independent slow oracle: plain nested loops over every tuple."""
    out = np.zeros(2 * C + 1, dtype=complex)
    ranges = [[k for k in range(-f.N, f.N + 1) if k] for f in fields]
    for t in itertools.product(*ranges):
        k = sum(t)
        if k == 0 or abs(k) > C:
            continue
        arr = np.array([t])
        if domain is not None and not domain(arr)[0]:
            continue
        val = symbol(arr)[0]
        for f, kj in zip(fields, t):
            val *= f.coeff(kj)
        out[k + C] += val
    return out


def test_poly_validation_and_parse():
    with pytest.raises(ValueError):
        PolyNonlinearity(((1.0, 1),))
    with pytest.raises(ValueError):
        PolyNonlinearity(((1.0, 3), (1.0, 2)))
    P = PolyNonlinearity.parse("1:3, 0.5:4")
    assert P.degrees == (3, 4) and P.monomials[1] == (0.5, 4)
    assert PolyNonlinearity.parse(P.format()) == P
    assert PolyNonlinearity.zero().is_zero


def test_dxP_examples():
    d = dxP(COS, PolyNonlinearity.monomial(2))
    assert np.isclose(d.coeff(2), 0.5j) and np.isclose(d.coeff(1), 0)
    d3 = dxP(COS, PolyNonlinearity.monomial(3))
    p3 = power(COS, 3)
    assert np.isclose(d3.coeff(1), 1j * p3.coeff(1)) and np.isclose(d3.coeff(3), 3j * p3.coeff(3))
    assert np.all(dxP(COS, PolyNonlinearity.zero()).pos == 0)


def test_r1_cos_cubic():
    # (u^2)_0 = 1/2, so R1_1 = i * (1/2) * 3 * (1/2)
    r1 = resonant_r1(COS, PolyNonlinearity.monomial(3))
    assert np.isclose(r1.coeff(1), 0.75j)


def test_quadratic_has_no_resonance():
    u = random_sobolev(1, 10, 1)
    P = PolyNonlinearity.monomial(2)
    assert np.all(resonant_r1(u, P).pos == 0)
    assert np.all(resonant_r2(u, P).pos == 0)


def test_r1_plus_r2_is_direct_resonant_sum():
    u = from_modes([(1, 0.5), (2, 0.5)])
    P = PolyNonlinearity.monomial(3)
    ref = brute([u] * 3, sym_ik, resonant_mask, 6)
    total = resonant_r1(u, P) + resonant_r2(u, P)
    assert np.allclose(total.with_cutoff(6).full(), ref, atol=1e-14)
    assert np.allclose(resonant_full(u, P).full(6), ref, atol=1e-14)


def test_r2_homogeneity():
    u = random_sobolev(1, 8, 2)
    P = PolyNonlinearity.monomial(4)
    lam = 1.7
    assert np.allclose(resonant_r2(lam * u, P).pos, lam ** 4 * resonant_r2(u, P).pos, rtol=1e-12)


def test_enumerate_resonant_examples():
    R, per = enumerate_resonant(1, 2, 5)
    assert R == [] and all(p == [] for p in per)
    R, per = enumerate_resonant(1, 3, 2)
    assert (1, 2, -2) in R and (1, -2, 2) in R and (2, -2, 1) in R
    brute_set = {t for t in itertools.product([-2, -1, 1, 2], repeat=3)
                 if sum(t) == 1 and 1 in t}
    assert set(R) == brute_set


@pytest.mark.parametrize("k, n, K", [(1, 3, 3), (2, 4, 3), (3, 2, 4), (-1, 3, 4), (5, 3, 4)])
def test_inclusion_exclusion(k, n, K):
    assert inclusion_exclusion_residual(k, n, K) == 0


def test_split_examples():
    u = COS
    s = split_nr(u, PolyNonlinearity.monomial(2))
    assert np.all(s.hl[0].pos == 0)
    assert np.allclose(s.hh.pos, s.dxp.pos)
    v = from_modes([(1, 0.5), (20, 0.005)])
    s = split_nr(v, PolyNonlinearity.monomial(2))
    assert abs(s.hl[0].coeff(21)) > 0 and abs(s.hl[0].coeff(19)) > 0
    assert sobolev_norm(s.residual(), 0) <= 1e-15


@pytest.mark.parametrize("P", MATRIX, ids=lambda P: P.format())
def test_partition_identity(P):
    u = random_sobolev(0.8, 10, 11)
    s = split_nr(u, P)
    assert sobolev_norm(s.residual(), 0) <= 1e-12 * sobolev_norm(s.dxp, 0)


def test_hl_against_brute_force():
    u = random_sobolev(0.5, 9, 4)
    m = hl_mask(4.0)
    ref = brute([u, u], sym_ik, m, 18)
    got = split_nr(u, PolyNonlinearity.monomial(2)).hl[0].full(18)
    assert np.allclose(got, ref, atol=1e-14)


def test_multilinear_examples():
    u = random_sobolev(1, 6, 1)
    P = PolyNonlinearity.monomial(3)
    t = multilinear_apply(MultilinearSpec(3, sym_ik), [u] * 3)
    assert np.allclose(t.full(18), dxP(u, P).full(18), atol=1e-14)
    v = random_sobolev(1, 5, 2)
    prod = multilinear_apply(MultilinearSpec(2, sym_one), [u, v])
    ref = np.convolve(u.full(), v.full())
    assert np.allclose(prod.full(11), np.where(np.arange(23) == 11, 0, ref), atol=1e-14)
    empty = MultilinearSpec(2, sym_one, lambda t: np.zeros(len(t), bool))
    assert np.all(multilinear_apply(empty, [u, v]).pos == 0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 1000), st.floats(-3, 3), st.floats(-3, 3))
def test_multilinear_linearity(seed, a, b):
    u1, u2, v = (random_sobolev(1, 5, seed + i) for i in range(3))
    spec = MultilinearSpec(2, sym_ik, hl_mask(2.0))
    lhs = multilinear_apply(spec, [a * u1 + b * u2, v])
    rhs = a * multilinear_apply(spec, [u1, v]) + b * multilinear_apply(spec, [u2, v])
    assert np.allclose(lhs.pos, rhs.pos, atol=1e-12)


def test_multilinear_errors():
    u = random_sobolev(1, 30, 0)
    with pytest.raises(BudgetExceeded):
        multilinear_apply(MultilinearSpec(4, sym_ik), [u] * 4, budget=1000)
    bad = MultilinearSpec(2, lambda t: np.where(t[:, 0] == 1, np.inf, 1.0))
    with pytest.raises(FieldError):
        multilinear_apply(bad, [u, u])
    with pytest.raises(ValueError):
        multilinear_apply(MultilinearSpec(2, sym_ik), [u])


def test_polarization_bilinear():
    spec = MultilinearSpec(2, sym_one)
    v1, v2 = random_sobolev(1, 6, 0), random_sobolev(1, 6, 1)
    assert polarize_check(spec, [v1, v2], relative=True) <= 1e-14


@pytest.mark.parametrize("n", [2, 3, 4])
def test_polarization_nf_symbol(n):
    vs = [random_sobolev(1, 6, 10 + j) for j in range(n)]
    assert polarize_check(nf_symmetric_spec(n), vs, relative=True) <= 1e-12


def test_polarization_rejects_asymmetric():
    spec = MultilinearSpec(2, lambda t: t[:, 0] + 0j)
    with pytest.raises(ValueError, match="symbol"):
        polarize_check(spec, [random_sobolev(1, 4, 0)] * 2)
    spec = MultilinearSpec(3, sym_ik, hl_mask(4.0))
    with pytest.raises(ValueError, match="domain"):
        polarize_check(spec, [random_sobolev(1, 4, 0)] * 3)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(MATRIX))
def test_outputs_hermitian(seed, P):
    u = random_sobolev(1, 6, seed)
    s = split_nr(u, P)
    for f in (s.r1, s.r2, s.hh, *s.hl):
        assert isinstance(f, SpectralField)
        assert np.all(np.isfinite(f.pos))
