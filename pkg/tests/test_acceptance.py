"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
import time

import numpy as np
import pytest

from gkdv_lab import dispersion, normal_form
from gkdv_lab.experiments import growth_track, read_report, smoothing_scan, write_report
from gkdv_lab.fourier import free_flow, random_sobolev, sobolev_norm, zero_field
from gkdv_lab.gauge import gauge_forward, gauge_inverse
from gkdv_lab.nonlinearity import MultilinearSpec, PolyNonlinearity, polarize_check, split_nr, sym_ik
from gkdv_lab.solver import SolverConfig, simulate, step

MKDV = PolyNonlinearity.monomial(3)
KDV = PolyNonlinearity.monomial(2)


def test_01_dispersion_identity(acceptance):
    t0 = time.perf_counter()
    ok = True
    for n in range(2, 6):
        t = dispersion.tuple_box(n, 8)
        ok &= np.array_equal(dispersion.h_n_array(t), dispersion.h_n_telescoped_array(t))
    rng = np.random.default_rng(0)
    for n in range(2, 9):
        t = rng.integers(-1000, 1001, size=(100_000 // 7 + 1, n))
        t[t == 0] = 1
        ok &= np.array_equal(dispersion.h_n_array(t), dispersion.h_n_telescoped_array(t))
    dt = time.perf_counter() - t0
    assert acceptance(1, "dispersion identity", ok and dt < 60, f"({dt:.1f}s)")


def test_02_case_analysis(acceptance):
    t0 = time.perf_counter()
    bad = {}
    for n, K in ((2, 50), (3, 30), (4, 12), (5, 8)):
        rep = dispersion.verify_cases(n, K)
        bad[n] = rep.counts["violations"]
    dt = time.perf_counter() - t0
    ok = all(v == 0 for v in bad.values()) and dt < 300
    assert acceptance(2, "exhaustive case analysis", ok, f"uncovered={bad} ({dt:.1f}s)")


def test_03_cancellations(acceptance):
    t0 = time.perf_counter()
    cases = [("self_n", PolyNonlinearity.monomial(n)) for n in (2, 3, 4)]
    cases += [("mixed_nm", PolyNonlinearity(((1.0, n), (1.0, m)))) for n, m in ((2, 3), (3, 4))]
    worst = 0.0
    for kind, P in cases:
        for sd in range(5):
            f, u = random_sobolev(1.0, 12, 2 * sd), random_sobolev(1.0, 12, 2 * sd + 1)
            worst = max(worst, normal_form.cancellation_residual(kind, f, u, P))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and dt < 300
    assert acceptance(3, "cancellations", ok, f"worst={worst:.3g} ({dt:.1f}s)")


def test_04_sigma_mu(acceptance):
    res = {n: normal_form.sigma_mu_sweep(n, 1000, 10) for n in (3, 4)}
    ok = all(r.mismatches == 0 and r.constant <= 10 for r in res.values())
    detail = ", ".join(f"n={n}: {r.count} tuples, mismatches={r.mismatches}, "
                       f"constant={r.constant:.3g}" for n, r in res.items())
    assert acceptance(4, "sigma-mu closed form", ok, detail)


def test_05_polarization(acceptance):
    worst = 0.0
    for n in (2, 3, 4):
        vs = [random_sobolev(1.0, 6, 100 + j) for j in range(n)]
        for spec in (MultilinearSpec(n, sym_ik), normal_form.nf_symmetric_spec(n)):
            worst = max(worst, polarize_check(spec, vs, relative=True))
    assert acceptance(5, "polarization", worst <= 1e-12, f"worst={worst:.3g}")


def test_06_partition(acceptance):
    worst = 0.0
    for P in (KDV, MKDV, PolyNonlinearity.monomial(4), PolyNonlinearity(((1.0, 3), (1.0, 4)))):
        for seed in range(3):
            u = random_sobolev(1.0, 12, seed)
            s = split_nr(u, P)
            worst = max(worst, sobolev_norm(s.residual(), 0) / sobolev_norm(s.dxp, 0))
    assert acceptance(6, "nonlinearity partition", worst <= 1e-12, f"worst={worst:.3g}")


def test_07_solver(acceptance):
    f = random_sobolev(1.0, 32, 1)
    lin = simulate(f, SolverConfig(32, 1e-4, 1.0, PolyNonlinearity.zero(), sample_every=10 ** 6))
    lin_err = sobolev_norm(lin.final() - free_flow(f, 1.0), 0)
    g = random_sobolev(3.0, 32, 1)
    run = lambda dt: simulate(g, SolverConfig(32, dt, 0.1, MKDV, sample_every=10 ** 7)).final()
    a, b, c = run(1e-4), run(5e-5), run(2.5e-5)
    ratio = sobolev_norm(a - b, 0) / sobolev_norm(b - c, 0)
    tr = simulate(g, SolverConfig(32, 1e-4, 1.0, MKDV, sample_every=100))
    d = tr.diagnostics
    drift = max(np.max(np.abs(d["mass"] / d["mass"][0] - 1)),
                np.max(np.abs(d["hamiltonian"] / d["hamiltonian"][0] - 1)))
    ok = lin_err <= 1e-10 and 16 * 0.8 <= ratio <= 16 * 1.2 and drift <= 1e-8
    assert acceptance(7, "solver", ok,
                      f"linear={lin_err:.3g} ratio={ratio:.3g} order={np.log2(ratio):.3g} "
                      f"drift={drift:.3g}")


def test_08_gauge(acceptance):
    f = random_sobolev(2.0, 16, 2)
    tr = simulate(f, SolverConfig(16, 1e-4, 0.5, MKDV, sample_every=50))
    g = gauge_forward(tr, MKDV)
    back = gauge_inverse(g, MKDV)
    rt = max(sobolev_norm(a - b, 1) for a, b in zip(back.states, tr.states))
    neq = max(abs(sobolev_norm(a, s) - sobolev_norm(b, s)) / sobolev_norm(b, s)
              for a, b in zip(g.states, tr.states) for s in (0.0, 1.0, 2.0))
    ok = rt <= 1e-9 and neq <= 1e-13
    assert acceptance(8, "gauge", ok, f"round_trip={rt:.3g} norm_gap={neq:.3g}")


def test_09_normal_form(acceptance):
    f = random_sobolev(1.0, 12, 7, amplitude=0.5)
    w0 = normal_form.w_decompose(f, f, 0.0, MKDV)
    ref = 3 * normal_form.t_nf(f, [f, f])
    e0 = sobolev_norm(w0 - ref.with_cutoff(w0.N), 0) / sobolev_norm(ref, 0)
    t0 = 0.02
    u0 = simulate(f, SolverConfig(12, 1e-4, t0, MKDV, equation="gauged",
                                  sample_every=10 ** 6)).final()
    tot = zero_field(1)
    for v in normal_form.w_rhs_terms(u0, f, t0, MKDV).values():
        tot = tot + v

    def fd(h):
        W = lambda s, u: free_flow(normal_form.w_decompose(u, f, s, MKDV), -s)
        up, um = step(u0, h, MKDV, gauged=True), step(u0, -h, MKDV, gauged=True)
        return free_flow((W(t0 + h, up) - W(t0 - h, um)) * (1 / (2 * h)), t0)

    e1, e2 = (sobolev_norm(fd(h) - tot, 0) for h in (1e-5, 5e-6))
    ok = e0 <= 1e-14 and e1 <= 1e-3 * sobolev_norm(tot, 0) and 3.0 < e1 / e2 < 5.0
    assert acceptance(9, "normal form consistency", ok,
                      f"w0={e0:.3g} fd={e1:.3g} halving_ratio={e1 / e2:.3g}")


@pytest.mark.parametrize("name, P", [("mKdV", MKDV), ("KdV", KDV)])
def test_10_smoothing(acceptance, name, P):
    t0 = time.perf_counter()
    rep = smoothing_scan(1.0, P, 256, 1.25e-6, 0.1, sample_every=4000)
    dt = time.perf_counter() - t0
    ok = rep.gamma_fit >= 0.5 and dt < 600
    assert acceptance(10, f"smoothing {name}", ok, f"gamma_fit={rep.gamma_fit:.3g} ({dt:.0f}s)")


def test_11_growth(acceptance, tmp_path):
    rep = growth_track(2.0, MKDV, 64, 5e-5, 50.0, amplitude=0.5)
    write_report(rep, tmp_path / "growth.csv")
    back = read_report(tmp_path / "growth.csv")
    schema = (back.times == rep.times and back.alpha_fit == rep.alpha_fit
              and len(back.hs_norm) == len(back.window_n) == len(back.high_norm))
    md, hd = rep.meta["mass_drift"], rep.meta["hamiltonian_drift"]
    ok = rep.alpha_fit <= 1.5 and md <= 1e-6 and hd <= 1e-6 and schema
    assert acceptance(11, "growth", ok, f"alpha={rep.alpha_fit:.3g} mass_drift={md:.3g} "
                                        f"hamiltonian_drift={hd:.3g}")


def test_12_nf_bound_ratio(acceptance):
    q = {n: normal_form.nf_bound_ratio(n, 1.0, 64) / normal_form.nf_bound_ratio(n, 1.0, 16)
         for n in (2, 3)}
    ok = all(v <= 2 for v in q.values())
    assert acceptance(12, "nf_bound_ratio stability", ok,
                      ", ".join(f"n={n}: {v:.3g}" for n, v in q.items()))
