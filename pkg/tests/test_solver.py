import numpy as np
import pytest

from gkdv_lab.fourier import free_flow, from_modes, random_sobolev, sobolev_norm, zero_field
from gkdv_lab.nonlinearity import PolyNonlinearity, dxP
from gkdv_lab.solver import (BlowUp, SolverConfig, invariants, nonlinear_rhs, simulate, step,
                             write_diagnostics_csv, write_trajectory_csv)

COS = from_modes([(1, 0.5)])
MKDV = PolyNonlinearity.monomial(3)


def test_invariants_examples():
    inv = invariants(COS, PolyNonlinearity.monomial(2))
    assert np.isclose(inv.mass, np.pi) and np.isclose(inv.hamiltonian, np.pi / 2)
    inv = invariants(COS, MKDV)
    assert np.isclose(inv.hamiltonian, np.pi / 2 + 2 * np.pi * (3 / 8) / 4)
    z = invariants(zero_field(4), MKDV)
    assert (z.mean, z.mass, z.hamiltonian) == (0, 0, 0)


def test_mass_matches_grid_integral():
    u = random_sobolev(1, 12, 0)
    L = 64
    x = u.to_grid(L)
    assert np.isclose(invariants(u, MKDV).mass, 2 * np.pi * np.mean(x ** 2))


@pytest.mark.parametrize("P", [PolyNonlinearity.monomial(2), MKDV,
                               PolyNonlinearity(((1.0, 3), (0.3, 4)))])
def test_fast_rhs_matches_exact(P):
    u = random_sobolev(1, 16, 3)
    assert np.allclose(nonlinear_rhs(u, P).pos, dxP(u, P, 16).pos, atol=1e-13)


def test_linear_step_exact():
    u = random_sobolev(1, 16, 1)
    assert np.allclose(step(u, 0.3, PolyNonlinearity.zero()).pos, free_flow(u, 0.3).pos)


def test_linear_run():
    f = random_sobolev(1, 32, 1)
    tr = simulate(f, SolverConfig(32, 1e-3, 1.0, PolyNonlinearity.zero(), sample_every=100))
    assert sobolev_norm(tr.final() - free_flow(f, 1.0), 0) <= 1e-10


def test_step_reversible():
    u = random_sobolev(2, 16, 2)
    back = step(step(u, 1e-4, MKDV), -1e-4, MKDV)
    assert sobolev_norm(back - u, 0) < 1e-12


def test_fourth_order_self_convergence():
    f = random_sobolev(3.0, 32, 1)
    run = lambda dt: simulate(f, SolverConfig(32, dt, 0.05, MKDV, sample_every=10 ** 9)).final()
    a, b, c = run(1e-4), run(5e-5), run(2.5e-5)
    ratio = sobolev_norm(a - b, 0) / sobolev_norm(b - c, 0)
    assert 16 * 0.8 <= ratio <= 16 * 1.2


def test_conservation_kdv():
    f = random_sobolev(3.0, 32, 4)
    tr = simulate(f, SolverConfig(32, 1e-4, 0.2, PolyNonlinearity.monomial(2),
                                  sample_every=500))
    d = tr.diagnostics
    assert np.max(np.abs(d["mass"] / d["mass"][0] - 1)) <= 1e-8
    assert np.max(np.abs(d["hamiltonian"] / d["hamiltonian"][0] - 1)) <= 1e-8


def test_hermitian_and_mean_structural():
    tr = simulate(random_sobolev(2, 8, 0), SolverConfig(8, 1e-3, 0.1, MKDV, sample_every=10))
    for u in tr.states:
        full = u.full()
        assert full[u.N] == 0
        assert np.allclose(full[:u.N][::-1], np.conj(full[u.N + 1:]))


def test_blowup_guard():
    with pytest.raises(BlowUp) as exc:
        simulate(from_modes([(1, 2.0)]),
                 SolverConfig(32, 1e-4, 1.0, PolyNonlinearity.monomial(5, -1.0), sample_every=10))
    assert exc.value.t_last >= 0


@pytest.mark.parametrize("kw", [dict(dt=0), dict(dt=-1), dict(T=0), dict(N=0),
                                dict(equation="other"), dict(sample_every=0)])
def test_config_validation(kw):
    base = dict(N=8, dt=1e-3, T=1.0, P=MKDV)
    base.update(kw)
    with pytest.raises(ValueError):
        SolverConfig(**base)


def test_csv_writers(tmp_path):
    tr = simulate(random_sobolev(2, 4, 0), SolverConfig(4, 1e-3, 0.01, MKDV, sample_every=5))
    write_trajectory_csv(tr, tmp_path / "traj.csv")
    write_diagnostics_csv(tr, tmp_path / "diag.csv")
    rows = (tmp_path / "traj.csv").read_text().splitlines()
    assert rows[0] == "t,k,re,im" and len(rows) == 1 + 4 * len(tr)
    head = (tmp_path / "diag.csv").read_text().splitlines()[0].split(",")
    assert head[:3] == ["t", "mass", "hamiltonian"] and head[-1] == "phase"
