"""Polynomial nonlinearity ``d/dx P(u)`` and its frequency decomposition.

For ``P(u) = sum_j a_j u^{d_j}`` the k-th mode of ``d/dx P(u)`` is a sum over
interactions ``k_1 + ... + k_d = k`` of ``ik * prod u_{k_j}``. It splits into

* ``R1``  resonant first-order part ``ik u_k sum_j a_j d_j (u^{d_j-1})_0``,
* ``R2``  the remaining resonant interactions (some ``k_j == k``),
* ``HL``  non-resonant interactions with one dominant input,
  ``|k_1| >= C_hl * max_{j>=2} |k_j|`` (returned with the dominant slot first),
* ``HH``  everything else, defined by subtraction so the split is exact.

Restricted sums are evaluated by direct enumeration. That is ``O(N^{n-1})``
work per output mode, which is only practical for small ``N``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dispersion import h_n_array
from .fourier import (BudgetExceeded, FieldError, SpectralField, power, zero_field,
                      sobolev_norm)

__all__ = [
    "PolyNonlinearity",
    "MultilinearSpec",
    "NonlinearSplit",
    "restricted_sum",
    "sym_ik",
    "sym_one",
    "nf_symbol",
    "resonant_mask",
    "hl_mask",
    "dominant_radius",
    "dxP",
    "resonant_rate",
    "resonant_r1",
    "resonant_full",
    "resonant_r2",
    "hl_term",
    "split_nr",
    "enumerate_resonant",
    "inclusion_exclusion_residual",
    "multilinear_apply",
    "polarize_check",
    "DIRECT_BUDGET",
]

#: Default cap on tuples visited by one restricted sum.
DIRECT_BUDGET = 20_000_000


@dataclass(frozen=True)
class PolyNonlinearity:
    """``P(u) = sum a_j u^{d_j}`` with strictly increasing degrees ``d_j >= 2``."""

    monomials: tuple

    def __post_init__(self):
        mons = tuple((float(a), int(d)) for a, d in self.monomials)
        if not mons:
            raise ValueError("need at least one monomial")
        degs = [d for _, d in mons]
        if any(d < 2 for d in degs):
            raise ValueError("degrees must be >= 2 (linear terms are removed by a Galilean shift)")
        if any(b <= a for a, b in zip(degs, degs[1:])):
            raise ValueError("degrees must be strictly increasing")
        if not all(math.isfinite(a) for a, _ in mons):
            raise ValueError("non-finite coefficient")
        object.__setattr__(self, "monomials", mons)

    @classmethod
    def monomial(cls, d: int, a: float = 1.0) -> "PolyNonlinearity":
        return cls(((a, d),))

    @classmethod
    def zero(cls) -> "PolyNonlinearity":
        return cls(((0.0, 2),))

    @classmethod
    def parse(cls, text: str) -> "PolyNonlinearity":
        """Parse ``"a:d, a:d"`` (e.g. ``"1:3, 0.5:4"``)."""
        mons = []
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            a, _, d = part.partition(":")
            if not d:
                raise ValueError(f"monomial {part!r} is not of the form coefficient:degree")
            mons.append((float(a), int(d)))
        return cls(tuple(mons))

    def format(self) -> str:
        return ", ".join(f"{a!r}:{d}" for a, d in self.monomials)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.monomials)

    @property
    def max_degree(self) -> int:
        return self.monomials[-1][1]

    @property
    def is_zero(self) -> bool:
        return all(a == 0 for a, _ in self.monomials)

    def active(self):
        """Monomials with nonzero coefficient."""
        return [(a, d) for a, d in self.monomials if a != 0]

    def __call__(self, z):
        return sum(a * z ** d for a, d in self.monomials)

    def antiderivative(self, z):
        """``G(z)`` with ``G' = P`` and ``G(0) = 0``."""
        return sum(a * z ** (d + 1) / (d + 1) for a, d in self.monomials)


Symbol = Callable[[np.ndarray], np.ndarray]
Mask = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class MultilinearSpec:
    """Symbol and frequency restriction of an n-linear Fourier multiplier.

    ``symbol`` and ``domain`` act on ``(M, n)`` int64 arrays of tuples.
    ``radius`` optionally bounds the trailing frequencies given ``k_1``
    (pure pruning: the domain must already imply it).
    """

    n: int
    symbol: Symbol
    domain: Mask | None = None
    radius: Callable[[int], int] | None = None
    name: str = ""


# -- symbols and domains ------------------------------------------------------

def sym_ik(t: np.ndarray) -> np.ndarray:
    return 1j * t.sum(axis=1)


def sym_one(t: np.ndarray) -> np.ndarray:
    return np.ones(len(t))


def nf_symbol(t: np.ndarray) -> np.ndarray:
    """Normal-form symbol ``k / H_n``; raises on a vanishing ``H_n``."""
    H = h_n_array(t)
    if np.any(H == 0):
        bad = t[H == 0][0]
        raise FieldError(f"H_n vanishes on admissible tuple {tuple(int(x) for x in bad)}")
    return t.sum(axis=1) / H


def resonant_mask(t: np.ndarray) -> np.ndarray:
    k = t.sum(axis=1)
    return (t == k[:, None]).any(axis=1)


def hl_mask(C_hl: float) -> Mask:
    """Slot 1 dominates, ``|k_1| >= C_hl max_{j>=2} |k_j|`` (ties included),
    and no slot carries the output frequency."""
    def mask(t: np.ndarray) -> np.ndarray:
        dom = np.abs(t[:, 0]) >= C_hl * np.max(np.abs(t[:, 1:]), axis=1)
        return dom & ~resonant_mask(t)
    return mask


def dominant_radius(C_hl: float) -> Callable[[int], int]:
    return lambda k1: int(math.floor(abs(k1) / C_hl + 1e-9))


# -- enumeration engine -------------------------------------------------------

def _slot_data(u: SpectralField, r: int):
    r = min(r, u.N)
    ks = np.array([x for x in range(-r, r + 1) if x], dtype=np.int64)
    full = u.full()
    vals = full[ks + u.N]
    return ks, vals


def _tail(fields: Sequence[SpectralField], r: int | None):
    """Cartesian product of the trailing slots (supports within radius ``r``)."""
    data = [_slot_data(f, f.N if r is None else r) for f in fields]
    keep = []
    for ks, vals in data:
        nz = vals != 0
        keep.append((ks[nz], vals[nz]))
    if any(len(ks) == 0 for ks, _ in keep):
        return np.zeros((0, len(fields)), dtype=np.int64), np.zeros(0, dtype=np.complex128)
    grids = np.meshgrid(*[ks for ks, _ in keep], indexing="ij")
    tk = np.stack(grids, axis=-1).reshape(-1, len(fields))
    prod = keep[0][1]
    for _, vals in keep[1:]:
        prod = np.multiply.outer(prod, vals)
    return tk, np.asarray(prod).reshape(-1)


def restricted_sum(fields: Sequence[SpectralField], symbol: Symbol, domain: Mask | None = None,
                   cutoff: int | None = None, radius: Callable[[int], int] | None = None,
                   budget: int = DIRECT_BUDGET, hermitian_tol: float = 1e-9) -> SpectralField:
    """Direct evaluation of ``sum_{k_1+..+k_n=k, domain} symbol * prod (f_j)_{k_j}``.

    Tuples are visited with ``k_1`` increasing and the trailing indices in
    lexicographic order, so the floating-point result is reproducible.
    Output modes with ``|k| > cutoff`` (default ``sum N_j``) are dropped.
    """
    n = len(fields)
    if n < 1:
        raise ValueError("need at least one input")
    C = int(cutoff) if cutoff is not None else sum(f.N for f in fields)
    head_k, head_v = _slot_data(fields[0], fields[0].N)
    nz = head_v != 0
    head_k, head_v = head_k[nz], head_v[nz]
    tails = {}
    plan = []
    visited = 0
    for k1, v1 in zip(head_k, head_v):
        r = None if radius is None else radius(int(k1))
        if r is not None and r < 1 and n > 1:
            continue
        if r not in tails:
            tails[r] = _tail(fields[1:], r) if n > 1 else (np.zeros((1, 0), dtype=np.int64),
                                                          np.ones(1, dtype=np.complex128))
        visited += len(tails[r][1])
        plan.append((int(k1), v1, r))
    if visited > budget:
        raise BudgetExceeded(f"restricted sum visits {visited} tuples (budget {budget})")
    acc_re = np.zeros(2 * C + 1)
    acc_im = np.zeros(2 * C + 1)
    for k1, v1, r in plan:
        tk, tv = tails[r]
        if len(tv) == 0:
            continue
        t = np.concatenate([np.full((len(tk), 1), k1, dtype=np.int64), tk], axis=1)
        if domain is not None:
            m = np.asarray(domain(t), dtype=bool)
            t, tv = t[m], tv[m]
            if len(tv) == 0:
                continue
        k = t.sum(axis=1)
        inside = (np.abs(k) <= C) & (k != 0)
        t, tv, k = t[inside], tv[inside], k[inside]
        if len(k) == 0:
            continue
        sig = np.asarray(symbol(t))
        if not np.all(np.isfinite(sig)):
            raise FieldError("symbol is not finite on the domain")
        w = sig * v1 * tv
        acc_re += np.bincount(k + C, weights=w.real, minlength=2 * C + 1)
        acc_im += np.bincount(k + C, weights=w.imag, minlength=2 * C + 1)
    return SpectralField.from_full(acc_re + 1j * acc_im, tol=hermitian_tol)


# -- the nonlinearity and its pieces ------------------------------------------

def dxP(u: SpectralField, P: PolyNonlinearity, cutoff: int | None = None) -> SpectralField:
    """Exact modes of ``d/dx P(u)`` for ``|k| <= cutoff`` (default ``deg P * N``)."""
    C = P.max_degree * u.N if cutoff is None else int(cutoff)
    if C < 1:
        raise ValueError("cutoff must be >= 1")
    acc = np.zeros(C + 1, dtype=np.complex128)
    for a, d in P.active():
        pw = power(u, d).coeffs
        m = min(C, len(pw) - 1)
        acc[:m + 1] += a * pw[:m + 1]
    k = np.arange(1, C + 1)
    return SpectralField(1j * k * acc[1:])


def resonant_rate(u: SpectralField, P: PolyNonlinearity) -> float:
    """``sum_j a_j d_j (u^{d_j-1})_0``: zero-mode (mean) coefficients, no 2*pi."""
    rate = 0.0
    for a, d in P.active():
        if d - 1 >= 2:
            rate += a * d * power(u, d - 1).coeffs[0].real
    return rate


def resonant_r1(u: SpectralField, P: PolyNonlinearity) -> SpectralField:
    return SpectralField(u.ik().pos * resonant_rate(u, P))


def _monomial_sum(u, P, mask, cutoff=None, radius=None, budget=DIRECT_BUDGET, weight=None):
    C = P.max_degree * u.N if cutoff is None else cutoff
    out = zero_field(C)
    for a, d in P.active():
        w = a if weight is None else a * weight(d)
        term = restricted_sum([u] * d, sym_ik, mask, cutoff=C, radius=radius, budget=budget)
        out = out + w * term
    return out


def resonant_full(u: SpectralField, P: PolyNonlinearity,
                  budget: int = DIRECT_BUDGET) -> SpectralField:
    """Direct sum of ``ik prod u_{k_j}`` over all resonant interactions."""
    return _monomial_sum(u, P, resonant_mask, cutoff=u.N, budget=budget)


def resonant_r2(u: SpectralField, P: PolyNonlinearity,
                budget: int = DIRECT_BUDGET) -> SpectralField:
    return resonant_full(u, P, budget) - resonant_r1(u, P)


def hl_term(first: SpectralField, rest: Sequence[SpectralField], C_hl: float = 4.0,
            cutoff: int | None = None, budget: int = DIRECT_BUDGET) -> SpectralField:
    """High-low operator ``HL^d[first, rest...]`` with symbol ``ik``."""
    fields = [first, *rest]
    return restricted_sum(fields, sym_ik, hl_mask(C_hl), cutoff=cutoff,
                          radius=dominant_radius(C_hl), budget=budget)


@dataclass
class NonlinearSplit:
    dxp: SpectralField
    r1: SpectralField
    r2: SpectralField
    hl: list  # HL^{d} per monomial of P (unweighted), in degree order
    hh: SpectralField
    degrees: tuple
    weights: tuple  # a_j * d_j

    def hl_weighted(self) -> SpectralField:
        out = zero_field(1)
        for w, h in zip(self.weights, self.hl):
            out = out + w * h
        return out

    def residual(self) -> SpectralField:
        return self.dxp - self.r1 - self.r2 - self.hl_weighted() - self.hh


def split_nr(u: SpectralField, P: PolyNonlinearity, C_hl: float = 4.0,
             budget: int = DIRECT_BUDGET) -> NonlinearSplit:
    """Decompose ``d/dx P(u)`` into ``R1 + R2 + sum a_j d_j HL^{d_j} + HH``."""
    C = P.max_degree * u.N
    full = dxP(u, P, C)
    r1 = resonant_r1(u, P)
    r2 = resonant_r2(u, P, budget)
    hls, weights, degs = [], [], []
    for a, d in P.monomials:
        degs.append(d)
        weights.append(a * d)
        hls.append(hl_term(u, [u] * (d - 1), C_hl, cutoff=C, budget=budget) if a != 0
                   else zero_field(C))
    nr = full - r1 - r2
    hh = nr
    for w, h in zip(weights, hls):
        hh = hh - w * h
    return NonlinearSplit(full, r1, r2, hls, hh, tuple(degs), tuple(weights))


# -- resonant set combinatorics -----------------------------------------------

def _box_sum(m: int, target: int, K: int, budget: int) -> np.ndarray:
    """All ``m``-tuples in ``[-K, K]\\{0}`` summing to ``target``."""
    if m == 0:
        return np.zeros((1 if target == 0 else 0, 0), dtype=np.int64)
    if (2 * K) ** m > budget:
        raise BudgetExceeded(f"enumeration of {(2 * K) ** m} tuples exceeds budget {budget}")
    r = np.array([x for x in range(-K, K + 1) if x], dtype=np.int64)
    g = np.stack(np.meshgrid(*([r] * m), indexing="ij"), axis=-1).reshape(-1, m)
    return g[g.sum(axis=1) == target]


def enumerate_resonant(k: int, n: int, K: int, budget: int = DIRECT_BUDGET):
    """Explicit resonant sets ``R_k`` and ``R_k^l`` (``l = 1..n``) in the box ``|k_j| <= K``.

    Returns ``(R_k, [R_k^1, ..., R_k^n])`` as sorted lists of tuples.
    """
    if k == 0:
        raise ValueError("k must be nonzero")
    if n < 2:
        raise ValueError("n must be >= 2")
    per_slot = []
    if abs(k) <= K:
        rest = _box_sum(n - 1, 0, K, budget)
        for l in range(n):
            tuples = np.insert(rest, l, k, axis=1)
            per_slot.append(sorted(tuple(int(x) for x in row) for row in tuples))
    else:
        per_slot = [[] for _ in range(n)]
    union = sorted(set().union(*map(set, per_slot)))
    return union, per_slot


def inclusion_exclusion_residual(k: int, n: int, K: int, budget: int = DIRECT_BUDGET) -> int:
    """``| |R_k| - sum_{S != {}} (-1)^{|S|+1} |cap_{l in S} R_k^l| |``.

    Intersections are counted independently of the union: a tuple lies in
    every ``R_k^l`` with ``l in S`` iff those slots equal ``k`` and the
    total is ``k``.
    """
    union, _ = enumerate_resonant(k, n, K, budget)
    alt = 0
    if abs(k) <= K:
        for size in range(1, n + 1):
            free = n - size
            target = k - size * k
            count = len(_box_sum(free, target, K, budget))
            alt += (-1) ** (size + 1) * math.comb(n, size) * count
    return abs(len(union) - alt)


# -- generic multilinear operators --------------------------------------------

def multilinear_apply(spec: MultilinearSpec, inputs: Sequence[SpectralField],
                      cutoff: int | None = None, budget: int = DIRECT_BUDGET) -> SpectralField:
    if len(inputs) != spec.n:
        raise ValueError(f"expected {spec.n} inputs, got {len(inputs)}")
    return restricted_sum(inputs, spec.symbol, spec.domain, cutoff=cutoff, radius=spec.radius,
                          budget=budget)


def _check_symmetric(spec: MultilinearSpec, K: int = 6, samples: int = 400, seed: int = 0):
    rng = np.random.default_rng(seed)
    r = np.array([x for x in range(-K, K + 1) if x], dtype=np.int64)
    t = rng.choice(r, size=(samples, spec.n))
    t = t[t.sum(axis=1) != 0]
    base_dom = np.ones(len(t), bool) if spec.domain is None else np.asarray(spec.domain(t), bool)
    with np.errstate(all="ignore"):
        base = np.asarray(spec.symbol(t[base_dom])) if base_dom.any() else None
    for perm in itertools.permutations(range(spec.n)):
        tp = t[:, perm]
        dom = np.ones(len(t), bool) if spec.domain is None else np.asarray(spec.domain(tp), bool)
        if not np.array_equal(dom, base_dom):
            raise ValueError("domain is not permutation-invariant")
        if base is not None:
            with np.errstate(all="ignore"):
                other = np.asarray(spec.symbol(tp[dom]))
            if not np.allclose(other, base, rtol=1e-12, atol=0, equal_nan=True):
                raise ValueError("symbol is not permutation-invariant")


def polarize_check(spec: MultilinearSpec, vs: Sequence[SpectralField], relative: bool = False,
                   cutoff: int | None = None, budget: int = DIRECT_BUDGET) -> float:
    """Residual of the polarization identity for a symmetric operator ``T``::

        sum_{A proper subset} (-1)^{|A|} T(sum_{j not in A} v_j) = n! T(v_1, .., v_n)

    where ``T(v) = T(v, .., v)``. Returns the ``H^0`` norm of the difference,
    divided by ``||n! T(v_1..v_n)||`` when ``relative``.
    """
    n = spec.n
    if len(vs) != n:
        raise ValueError(f"need {n} fields")
    _check_symmetric(spec)
    C = cutoff if cutoff is not None else n * max(v.N for v in vs)
    lhs = zero_field(C)
    for size in range(n):
        for A in itertools.combinations(range(n), size):
            keep = [vs[j] for j in range(n) if j not in A]
            s = keep[0]
            for v in keep[1:]:
                s = s + v
            term = multilinear_apply(spec, [s] * n, cutoff=C, budget=budget)
            lhs = lhs + (-1) ** size * term
    rhs = math.factorial(n) * multilinear_apply(spec, list(vs), cutoff=C, budget=budget)
    res = sobolev_norm(lhs - rhs, 0.0)
    if relative:
        scale = sobolev_norm(rhs, 0.0)
        return res / scale if scale > 0 else res
    return res
