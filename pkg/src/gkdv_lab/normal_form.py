"""Normal-form operator, the corrected variable ``w`` and its symbol algebra.

``T^n_NF(f, v_2, .., v_n)`` has symbol ``k / H_n`` on the high-low domain
(slot 1 dominant by the factor ``C_hl``, no slot equal to the output
frequency). With the Airy group ``exp(+ik^3 t)`` one has

    (d_t + d_x^3) T_NF(F, v, .., v) = -HL[F, v, .., v] + (n-1) T_NF(F, v, .., (d_t + d_x^3) v)

for a free wave ``F``. Hence ``w = u~ - F + sum_j a_j d_j T^{d_j}_NF(F, u~, .., u~)``
removes the high-low interaction of the free wave from the gauged equation,
and ``w(0) = sum_j a_j d_j T^{d_j}_NF(f, .., f)``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dispersion import h_n, h_n_array
from .fourier import (SpectralField, free_flow, project, random_sobolev, sobolev_norm,
                      zero_field)
from .nonlinearity import (DIRECT_BUDGET, MultilinearSpec, PolyNonlinearity, dominant_radius,
                           hl_mask, hl_term, nf_symbol, resonant_mask, resonant_r1,
                           restricted_sum, split_nr, dxP, _tail)

__all__ = [
    "NormalFormConfig",
    "check_nf_domain",
    "t_nf",
    "nf_spec",
    "nf_symmetric_spec",
    "nf_bound_ratio",
    "w_decompose",
    "w_rhs_terms",
    "gauged_generator",
    "remain_residual",
    "SigmaMu",
    "sigma_minus_mu",
    "SigmaMuSweep",
    "sigma_mu_sweep",
    "cancellation_residual",
]


@dataclass(frozen=True)
class NormalFormConfig:
    C_hl: float = 4.0
    cutoff: int | None = None
    budget: int = DIRECT_BUDGET

    def __post_init__(self):
        if not self.C_hl >= 2:
            raise ValueError("C_hl must be >= 2 so the dominant frequency cannot cancel")


@functools.lru_cache(maxsize=None)
def check_nf_domain(n: int, C_hl: float, tuple_cap: int = 1_000_000) -> int:
    """Enumerate a box of high-low tuples and confirm ``H_n != 0`` there.

    Returns the number of admissible tuples checked.
    """
    K = 1
    while (2 * (K + 1)) ** n <= tuple_cap:
        K += 1
    r = np.array([x for x in range(-K, K + 1) if x], dtype=np.int64)
    g = np.stack(np.meshgrid(*([r] * n), indexing="ij"), axis=-1).reshape(-1, n)
    g = g[g.sum(axis=1) != 0]
    g = g[hl_mask(C_hl)(g)]
    H = h_n_array(g)
    if np.any(H == 0):
        bad = tuple(int(x) for x in g[H == 0][0])
        raise ValueError(f"H_{n} vanishes on high-low tuple {bad} for C_hl={C_hl}")
    return len(g)


def nf_spec(n: int, C_hl: float = 4.0) -> MultilinearSpec:
    return MultilinearSpec(n, nf_symbol, hl_mask(C_hl), dominant_radius(C_hl), name="T_NF")


def nf_symmetric_spec(n: int, C_hl: float = 4.0) -> MultilinearSpec:
    """``k / H_n`` on tuples where some slot dominates; permutation invariant."""
    def domain(t):
        a = np.abs(t)
        top = np.sort(a, axis=1)
        return (top[:, -1] >= C_hl * top[:, -2]) & ~resonant_mask(t)
    return MultilinearSpec(n, nf_symbol, domain, name="T_NF symmetrized")


def t_nf(f: SpectralField, vs: Sequence[SpectralField], cfg: NormalFormConfig = NormalFormConfig(),
         cutoff: int | None = None) -> SpectralField:
    """``T^n_NF(f, v_2, .., v_n)`` with ``n = 1 + len(vs)``."""
    n = 1 + len(vs)
    if n < 2:
        raise ValueError("T_NF needs at least one trailing input")
    check_nf_domain(n, float(cfg.C_hl))
    C = cutoff if cutoff is not None else cfg.cutoff
    return restricted_sum([f, *vs], nf_symbol, hl_mask(cfg.C_hl), cutoff=C,
                          radius=dominant_radius(cfg.C_hl), budget=cfg.budget)


def nf_bound_ratio(n: int, s: float, N: int, trials: int = 4, seed: int = 0,
                   s_v: float = 0.6, cfg: NormalFormConfig = NormalFormConfig()) -> float:
    """``max ||T_NF(u, v, .., v)||_{H^{s+1}} / (||u||_{H^s} ||v||_{H^{s_v}}^{n-1})``
    over random-phase trials with profiles in ``H^s`` and ``H^{s_v}``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    best = float("nan")
    for i in range(trials):
        u = random_sobolev(s, N, seed + 2 * i)
        v = random_sobolev(s_v, N, seed + 2 * i + 1)
        den = sobolev_norm(u, s) * sobolev_norm(v, s_v) ** (n - 1)
        if den == 0:
            continue
        r = sobolev_norm(t_nf(u, [v] * (n - 1), cfg), s + 1) / den
        best = r if not best >= r else best
    return best


def _nf_sum(F, u, P, cfg, cutoff):
    out = zero_field(1)
    for a, d in P.active():
        out = out + (a * d) * t_nf(F, [u] * (d - 1), cfg, cutoff)
    return out


def w_decompose(u_t: SpectralField, f: SpectralField, t: float, P: PolyNonlinearity,
                cfg: NormalFormConfig = NormalFormConfig()) -> SpectralField:
    """``w = u~(t) - F + sum_j a_j d_j T^{d_j}_NF(F, u~, .., u~)`` with ``F = free_flow(f, t)``.

    ``u_t`` must be the gauged solution. Modes up to ``deg P * N`` are kept.
    """
    F = free_flow(f, t)
    C = cfg.cutoff or P.max_degree * max(u_t.N, f.N)
    return u_t - F + _nf_sum(F, u_t, P, cfg, C)


def gauged_generator(u: SpectralField, P: PolyNonlinearity) -> SpectralField:
    """``(d_t + d_x^3) u~`` for the Galerkin gauged flow: ``P_N (dxP - R1)``."""
    return dxP(u, P, u.N) - resonant_r1(u, P)


def w_rhs_terms(u: SpectralField, f: SpectralField, t: float, P: PolyNonlinearity,
                cfg: NormalFormConfig = NormalFormConfig()) -> dict:
    """Terms of ``(d_t + d_x^3) w`` along the Galerkin gauged flow at cutoff ``N``.

    With ``F = free_flow(f, t)``, ``L = P_N (R2 + NR)[u~]`` and ``T^e = T^e_NF(F, u~, .., u~)``:

    * ``w1``  ``P_N (R2 + HH)[u~]``
    * ``w2``  ``sum a_d d P_N HL^d[w, u~, .., u~]``
    * ``w3``  ``a_d d (d-1) T^d_NF(F, u~, .., u~, L)`` for the lowest degree
    * ``w4``  the same for the remaining degrees
    * ``w5``  ``-sum_d (a_d d)^2 P_N HL^d[T^d, u~, .., u~]``
    * ``w6``  ``-sum_{d != e} a_d d a_e e P_N HL^d[T^e, u~, .., u~]``
    * ``trunc``  ``-sum a_d d P_{>N} HL^d[F, u~, .., u~]`` (Galerkin truncation)
    """
    N = u.N
    C = P.max_degree * max(N, f.N)
    F = free_flow(f, t)
    hb = cfg.budget
    split = split_nr(u, P, cfg.C_hl, budget=hb)
    w1 = project((split.r2 + split.hh).with_cutoff(C), N)
    w = w_decompose(u, f, t, P, cfg)
    L = gauged_generator(u, P)
    act = P.active()
    terms = {k: zero_field(C) for k in ("w1", "w2", "w3", "w4", "w5", "w6", "trunc")}
    terms["w1"] = w1
    if not act:
        return terms
    Ts = {d: t_nf(F, [u] * (d - 1), cfg, C) for _, d in act}
    d0 = act[0][1]
    for a, d in act:
        rest = [u] * (d - 1)
        terms["w2"] = terms["w2"] + (a * d) * project(
            hl_term(w, rest, cfg.C_hl, cutoff=C, budget=hb).with_cutoff(C), N)
        tr = t_nf(F, [u] * (d - 2) + [L], cfg, C)
        key = "w3" if d == d0 else "w4"
        terms[key] = terms[key] + (a * d * (d - 1)) * tr
        for b, e in act:
            h = project(hl_term(Ts[e], rest, cfg.C_hl, cutoff=C, budget=hb).with_cutoff(C), N)
            key = "w5" if e == d else "w6"
            terms[key] = terms[key] - (a * d * b * e) * h
        hf = hl_term(F, rest, cfg.C_hl, cutoff=C, budget=hb).with_cutoff(C)
        terms["trunc"] = terms["trunc"] - (a * d) * project(hf, N, band="high")
    return terms


def remain_residual(n: int, f: SpectralField, g: SpectralField, t: float, h: float,
                    lam: float = 0.5, cfg: NormalFormConfig = NormalFormConfig()) -> tuple:
    """Finite-difference check of the transport identity of ``T_NF``.

    Uses ``F = free_flow(f, t)`` and ``v(t) = (1 + lam t) free_flow(g, t)``, for which
    ``(d_t + d_x^3) v = lam free_flow(g, t)``. Returns ``(residual, scale)`` in ``H^0`` of

        (d_t + d_x^3) T(F, v..v) + HL[F, v..v] - (n-1) T(F, v.., (d_t + d_x^3) v)

    where the time derivative is a central difference of the interaction
    variable ``free_flow(T, -t)``.
    """
    C = n * max(f.N, g.N)

    def T_at(s):
        v = (1 + lam * s) * free_flow(g, s)
        return free_flow(t_nf(free_flow(f, s), [v] * (n - 1), cfg, C), -s)

    dW = (T_at(t + h) - T_at(t - h)) * (1.0 / (2 * h))
    lhs = free_flow(dW, t)
    F = free_flow(f, t)
    v = (1 + lam * t) * free_flow(g, t)
    Lv = lam * free_flow(g, t)
    hl = hl_term(F, [v] * (n - 1), cfg.C_hl, cutoff=C)
    tail = t_nf(F, [v] * (n - 2) + [Lv], cfg, C)
    res = lhs + hl - (n - 1) * tail
    return sobolev_norm(res, 0.0), sobolev_norm(hl, 0.0)


# -- sigma - mu algebra -------------------------------------------------------

@dataclass(frozen=True)
class SigmaMu:
    """Imaginary parts of ``sigma - mu`` (the quantity is purely imaginary)."""

    direct: object
    closed: object


def _closed_numerator(ks):
    """``N_c`` with ``sigma - mu = i N_c / (k~_2 H_n)``."""
    n = len(ks)
    tail = lambda j: sum(ks[j - 1:])  # k~_j, 1-based
    s2 = tail(2)
    first = ks[1] * tail(3) if n >= 3 else 0
    for p in range(3, n):
        first += ks[p - 1] * tail(p + 1)
    triple = 0
    for p in range(3, n):
        for l in range(2, p):
            for m in range(p + 1, n + 1):
                triple += ks[l - 1] * ks[p - 1] * ks[m - 1]
    return -first * s2 + triple


def sigma_minus_mu(head: Sequence[int], exact: bool = True) -> SigmaMu:
    """``sigma - mu`` for ``sigma = ik k~_1 / H_n`` restricted to ``k = k_1`` slot weight
    ``k_1``, i.e. ``sigma = i k_1 k~_1 / H_n``, and ``mu = i / (3 k~_2)``.

    Computed as a direct difference and from the closed form

        -i [k_2 k~_3 + sum_{p=3}^{n-1} k_p k~_{p+1}] / H_n
          + i sum_{p=3}^{n-1} sum_{l=2}^{p-1} sum_{m=p+1}^{n} k_l k_p k_m / (k~_2 H_n).

    For ``n = 2`` both vanish when ``k~_2 != 0``. ``exact`` selects
    :class:`fractions.Fraction` over float.
    """
    ks = [int(k) for k in head]
    n = len(ks)
    if n < 2 or any(k == 0 for k in ks):
        raise ValueError("need n >= 2 nonzero frequencies")
    s1, s2 = sum(ks), sum(ks[1:])
    H = h_n(ks)
    if s2 == 0 or H == 0:
        raise ZeroDivisionError("k~_2 or H_n vanishes")
    num = Fraction if exact else float
    direct = num(ks[0] * s1) / num(H) - num(1) / num(3 * s2)
    closed = num(_closed_numerator(ks)) / num(s2 * H)
    return SigmaMu(direct, closed)


@dataclass
class SigmaMuSweep:
    n: int
    count: int
    mismatches: int
    constant: float
    witness: tuple | None
    spot_checks: int


def sigma_mu_sweep(n: int, k1_max: int = 1000, K: int = 10, C_hl: float = 4.0,
                   spot_checks: int = 200, seed: int = 0) -> SigmaMuSweep:
    """Exhaustive check over ``1 <= k_1 <= k1_max``, ``0 < |k_j| <= K`` with ``k_1`` dominant.

    Exactness is tested on integers: ``3 N_c == 3 k_1 k~_1 k~_2 - H_n`` is the
    cleared-denominator form of ``closed == direct``. Random tuples are also
    re-checked in :class:`~fractions.Fraction` arithmetic. The bound constant
    is ``max |sigma - mu| k_1^2 / (k_max2 k_max3 k_max4)`` (``k_max_j = 1`` past ``n``).
    """
    r = np.array([x for x in range(-K, K + 1) if x], dtype=np.int64)
    tails = np.stack(np.meshgrid(*([r] * (n - 1)), indexing="ij"), axis=-1).reshape(-1, n - 1)
    tails = tails[tails.sum(axis=1) != 0]
    count = mism = 0
    best, witness = 0.0, None
    for k1 in range(1, k1_max + 1):
        t = tails[np.abs(tails).max(axis=1) * C_hl <= k1]
        if len(t) == 0:
            continue
        full = np.concatenate([np.full((len(t), 1), k1, dtype=np.int64), t], axis=1)
        H = h_n_array(full)
        ok = H != 0
        full, H = full[ok], H[ok]
        s1 = full.sum(axis=1)
        s2 = s1 - k1
        Nc = np.zeros(len(full), dtype=np.int64)
        ks = [full[:, j] for j in range(n)]
        tail = lambda j: full[:, j - 1:].sum(axis=1)
        first = ks[1] * tail(3) if n >= 3 else 0
        for p in range(3, n):
            first = first + ks[p - 1] * tail(p + 1)
        Nc = Nc - first * s2
        for p in range(3, n):
            for l in range(2, p):
                for m in range(p + 1, n + 1):
                    Nc = Nc + ks[l - 1] * ks[p - 1] * ks[m - 1]
        mism += int(np.count_nonzero(3 * Nc != 3 * k1 * s1 * s2 - H))
        count += len(full)
        val = np.abs(Nc / (s2 * H.astype(float)))
        mags = np.sort(np.abs(full[:, 1:]), axis=1)[:, ::-1]
        m = [mags[:, j] if j < n - 1 else np.ones(len(full)) for j in range(3)]
        const = val * k1 ** 2 / (m[0] * m[1] * m[2])
        i = int(np.argmax(const))
        if const[i] > best:
            best, witness = float(const[i]), tuple(int(x) for x in full[i])
    rng = np.random.default_rng(seed)
    done = 0
    for _ in range(spot_checks):
        k1 = int(rng.integers(int(C_hl * K), k1_max + 1))
        rest = [int(x) for x in rng.choice(r, size=n - 1)]
        if sum(rest) == 0 or h_n([k1, *rest]) == 0:
            continue
        sm = sigma_minus_mu([k1, *rest])
        if sm.direct != sm.closed:
            mism += 1
        done += 1
    return SigmaMuSweep(n, count, mism, best, witness, done)


# -- complete cancellations ---------------------------------------------------

def _group_sums(fields, r):
    """``A_s = sum_{k_1+..+k_m = s, |k_j| <= r} prod f_j`` for ``s = -mr..mr``."""
    m = len(fields)
    tk, tv = _tail(fields, r)
    out = np.zeros(2 * m * r + 1, dtype=np.complex128)
    if len(tv):
        s = tk.sum(axis=1) + m * r
        out += np.bincount(s, weights=tv.real, minlength=len(out))
        out += 1j * np.bincount(s, weights=tv.imag, minlength=len(out))
    return out


def _mu_pair(inner, outer, r):
    """``sum_{s != 0} i/(3 s) A_s B_{-s}`` and the same sum with moduli."""
    A = _group_sums(inner, r)
    Aabs = _group_sums([SpectralField(np.abs(x.pos)) for x in inner], r)
    B = _group_sums(outer, r)
    Babs = _group_sums([SpectralField(np.abs(x.pos)) for x in outer], r)
    ma, mb = len(inner) * r, len(outer) * r
    val = 0j
    scale = 0.0
    for s in range(-min(ma, mb), min(ma, mb) + 1):
        if s == 0:
            continue
        val += 1j / (3 * s) * A[s + ma] * B[-s + mb]
        scale += Aabs[s + ma] * Babs[-s + mb] / (3 * abs(s))
    return val, scale.real


def cancellation_residual(kind: str, f: SpectralField, u: SpectralField, P: PolyNonlinearity,
                          cfg: NormalFormConfig = NormalFormConfig(), t: float = 0.0,
                          outer: SpectralField | None = None, relative: bool = True) -> float:
    """``H^0`` norm of the mu-part ``T^B_mu`` of the normal-form remainder.

    For each output mode ``k`` the operator is ``F_k`` times a sum over
    inner frequencies ``k_2..k_n`` and outer frequencies ``k_{n+1}..`` with
    total zero, all ``|k_j| <= |k| / C_hl`` and inner sum ``s != 0``, of
    ``i/(3s)`` times the product of the inputs. ``self_n`` takes both groups
    of size ``d - 1`` for the single degree of ``P``; ``mixed_nm`` adds the
    two sums with group sizes ``(n-1, m-1)`` and ``(m-1, n-1)``. The sum
    vanishes because ``1/s`` is odd; passing a different ``outer`` field
    breaks that symmetry. With ``relative`` the result is divided by the
    same sum taken in absolute values.
    """
    act = P.active()
    if kind == "self_n":
        if len(act) != 1:
            raise ValueError("self_n needs a single-monomial P")
        (a, n), = act
        pairs = [((n - 1, n - 1), (a * n) ** 2)]
    elif kind == "mixed_nm":
        if len(act) != 2:
            raise ValueError("mixed_nm needs a two-monomial P")
        (a, n), (b, m) = act
        w = a * n * b * m
        pairs = [((n - 1, m - 1), w), ((m - 1, n - 1), w)]
    else:
        raise ValueError(f"unknown kind {kind!r}")
    F = free_flow(f, t)
    v = u if outer is None else outer
    out = np.zeros(F.N, dtype=np.complex128)
    ref = np.zeros(F.N)
    for k in range(1, F.N + 1):
        r = dominant_radius(cfg.C_hl)(k)
        if r < 1:
            continue
        tot, sc = 0j, 0.0
        for (gi, go), w in pairs:
            val, scale = _mu_pair([u] * gi, [v] * go, r)
            tot += w * val
            sc += abs(w) * scale
        out[k - 1] = F.pos[k - 1] * tot
        ref[k - 1] = abs(F.pos[k - 1]) * sc
    res = float(np.sqrt(2 * np.sum(np.abs(out) ** 2)))
    if relative:
        den = float(np.sqrt(2 * np.sum(ref ** 2)))
        return res / den if den > 0 else res
    return res
