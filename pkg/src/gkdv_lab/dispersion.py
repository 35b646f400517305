"""Dispersion generator ``H_n`` and the case analysis of n-wave interactions.

For nonzero integers ``k_1..k_n`` with output frequency ``k = sum k_j``::

    H_n = k^3 - sum_j k_j^3 = 3 * sum_{j<n} k_j * kt_j * kt_{j+1},
    kt_j = k_j + ... + k_n.

Every interaction with ``k != 0`` falls into at least one of four cases
(only A for n = 2; A/B/C for n = 3):

    A  |H_n| >= c_A * kmax_1^2
    B  k_j == k for some j                      (resonance)
    C  n = 3: |k_j| >= c_C |k| for all j;  n >= 4: kmax_3 >= c_C |k|
    D  kmax_3^2 * kmax_4 >= c_D * kmax_1^2       (n >= 4)

``kmax_j`` is the j-th largest of ``|k_1|..|k_n|``, with ``kmax_j = 1`` for
``j > n``. The constants are explicit here; defaults were checked
exhaustively on the boxes listed in :data:`DEFAULT_BOXES`.
"""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .fourier import BudgetExceeded

__all__ = [
    "ComparabilityConstants",
    "CaseReport",
    "ExhaustiveReport",
    "SupResult",
    "h_n",
    "h_n_telescoped",
    "h_n_array",
    "h_n_telescoped_array",
    "kmax_sorted",
    "classify",
    "case_masks",
    "verify_cases",
    "write_exhaustive_csv",
    "tuple_box",
    "symbol_ratio_sup",
    "DEFAULT_BOXES",
    "MAX_TUPLES",
]

#: Upper limit on the number of tuples any single enumeration may visit.
MAX_TUPLES = 20_000_000

#: (n, K) boxes on which the default constants are certified.
DEFAULT_BOXES = ((2, 50), (3, 30), (4, 12), (5, 8))

_INT64_SAFE = 2 ** 62


@dataclass(frozen=True)
class ComparabilityConstants:
    """Explicit constants standing in for the ``>~`` and ``>>`` relations."""

    c_A: float = 1.0
    c_C: float | None = None  # None -> 1/(2n)
    c_D: float = 0.25
    C_hl: float = 4.0

    def __post_init__(self):
        for name in ("c_A", "c_D"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.c_C is not None and not self.c_C > 0:
            raise ValueError("c_C must be positive")
        if self.C_hl < 2:
            raise ValueError("C_hl must be >= 2")

    def cC(self, n: int) -> float:
        return 1.0 / (2 * n) if self.c_C is None else self.c_C


@dataclass(frozen=True)
class CaseReport:
    tuple: tuple[int, ...]
    holds: frozenset
    H: int
    k: int
    kmax: tuple[int, int, int, int]
    ratios: dict = field(default_factory=dict)


@dataclass
class ExhaustiveReport:
    n: int
    K: int
    constants: ComparabilityConstants
    total: int
    zero_sum: int
    counts: dict
    violations: list
    sharp: dict

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class SupResult:
    value: float
    witness: tuple | None
    empty: bool
    count: int


def h_n(t: Sequence[int]) -> int:
    """``(sum k_j)^3 - sum k_j^3`` in exact integer arithmetic."""
    t = [int(x) for x in t]
    if len(t) < 2:
        raise ValueError("need at least two frequencies")
    if any(x == 0 for x in t):
        raise ValueError("frequencies must be nonzero")
    return sum(t) ** 3 - sum(x ** 3 for x in t)


def h_n_telescoped(t: Sequence[int]) -> int:
    """Telescoped form ``3 * sum_{j<n} k_j kt_j kt_{j+1}``."""
    t = [int(x) for x in t]
    if len(t) < 2:
        raise ValueError("need at least two frequencies")
    tails = list(itertools.accumulate(reversed(t)))[::-1]
    return 3 * sum(t[j] * tails[j] * tails[j + 1] for j in range(len(t) - 1))


def _check_width(t: np.ndarray):
    n = t.shape[1]
    big = int(np.max(np.abs(t))) if t.size else 0
    if (n * big) ** 3 * (n + 1) >= _INT64_SAFE:
        raise OverflowError("frequencies too large for checked int64 arithmetic")


def h_n_array(t: np.ndarray) -> np.ndarray:
    """Vectorised ``h_n`` over the rows of an ``(M, n)`` int array."""
    t = np.asarray(t, dtype=np.int64)
    _check_width(t)
    k = t.sum(axis=1)
    return k ** 3 - (t ** 3).sum(axis=1)


def h_n_telescoped_array(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=np.int64)
    _check_width(t)
    tails = np.cumsum(t[:, ::-1], axis=1)[:, ::-1]
    return 3 * (t[:, :-1] * tails[:, :-1] * tails[:, 1:]).sum(axis=1)


def kmax_sorted(t: np.ndarray, upto: int = 4) -> np.ndarray:
    """Descending ``|k_j|`` per row, padded with ones to ``upto`` columns."""
    t = np.atleast_2d(np.asarray(t, dtype=np.int64))
    m = -np.sort(-np.abs(t), axis=1)
    if m.shape[1] < upto:
        m = np.concatenate([m, np.ones((m.shape[0], upto - m.shape[1]), dtype=np.int64)], axis=1)
    return m


def case_masks(t: np.ndarray, c: ComparabilityConstants) -> dict:
    """Boolean masks of cases A-D for rows of ``t`` (all with nonzero sum)."""
    t = np.asarray(t, dtype=np.int64)
    n = t.shape[1]
    k = t.sum(axis=1)
    H = h_n_array(t)
    m = kmax_sorted(t)
    m1 = m[:, 0].astype(float)
    A = np.abs(H) >= c.c_A * m1 ** 2
    B = (t == k[:, None]).any(axis=1)
    none = np.zeros(len(t), dtype=bool)
    cC = c.cC(n)
    if n == 2:
        C, D = none, none
    elif n == 3:
        C = (np.abs(t) >= cC * np.abs(k)[:, None]).all(axis=1)
        D = none
    else:
        C = m[:, 2] >= cC * np.abs(k)
        D = m[:, 2].astype(float) ** 2 * m[:, 3] >= c.c_D * m1 ** 2
    return {"A": A, "B": B, "C": C, "D": D, "H": H, "k": k, "m": m}


def classify(t: Sequence[int], c: ComparabilityConstants | None = None) -> CaseReport:
    """Comparability cases (A-D) satisfied by one tuple."""
    c = c or ComparabilityConstants()
    tt = tuple(int(x) for x in t)
    if len(tt) < 2 or any(x == 0 for x in tt):
        raise ValueError("need n >= 2 nonzero frequencies")
    k = sum(tt)
    if k == 0:
        raise ValueError("output frequency k = 0 is excluded by the mean-zero reduction")
    masks = case_masks(np.array([tt]), c)
    holds = frozenset(name for name in "ABCD" if masks[name][0])
    m = tuple(int(x) for x in masks["m"][0, :4])
    H = h_n(tt)
    ratios = {
        "H_over_kmax2": abs(H) / m[0] ** 2,
        "kmax3_over_k": m[2] / abs(k) if len(tt) >= 3 else float("nan"),
        "D_ratio": m[2] ** 2 * m[3] / m[0] ** 2 if len(tt) >= 4 else float("nan"),
    }
    return CaseReport(tuple=tt, holds=holds, H=H, k=k, kmax=m, ratios=ratios)


def tuple_box(n: int, K: int, budget: int = MAX_TUPLES) -> np.ndarray:
    """All ``(k_1..k_n)`` with ``0 < |k_j| <= K`` in lexicographic order."""
    total = (2 * K) ** n
    if total > budget:
        raise BudgetExceeded(f"{total} tuples exceed budget {budget}")
    r = np.array([x for x in range(-K, K + 1) if x], dtype=np.int64)
    grids = np.meshgrid(*([r] * n), indexing="ij")
    return np.stack(grids, axis=-1).reshape(-1, n)


def _min_ratio(num: np.ndarray, den: np.ndarray, mask: np.ndarray) -> float:
    if not mask.any():
        return float("inf")
    return float(np.min(num[mask] / den[mask]))


def verify_cases(n: int, K: int, c: ComparabilityConstants | None = None,
                 budget: int = MAX_TUPLES, max_listed: int = 50) -> ExhaustiveReport:
    """Exhaustively check that every tuple in the box satisfies some case.

    ``sharp`` holds, per case, the largest constant that would still leave no
    violation given the other cases at their configured constants (the
    minimum of that case's ratio over tuples not covered otherwise).
    """
    c = c or ComparabilityConstants()
    if not 2 <= n <= 5:
        raise ValueError("exhaustive verification supports 2 <= n <= 5")
    t = tuple_box(n, K, budget)
    k = t.sum(axis=1)
    zero = k == 0
    t = t[~zero]
    ms = case_masks(t, c)
    A, B, C, D = ms["A"], ms["B"], ms["C"], ms["D"]
    m = ms["m"].astype(float)
    absk = np.abs(ms["k"]).astype(float)
    bad = ~(A | B | C | D)
    sharp = {"c_A": _min_ratio(np.abs(ms["H"]).astype(float), m[:, 0] ** 2, ~(B | C | D))}
    if n == 3:
        sharp["c_C"] = _min_ratio(np.min(np.abs(t), axis=1).astype(float), absk, ~(A | B | D))
    elif n >= 4:
        sharp["c_C"] = _min_ratio(m[:, 2], absk, ~(A | B | D))
        sharp["c_D"] = _min_ratio(m[:, 2] ** 2 * m[:, 3], m[:, 0] ** 2, ~(A | B | C))
    viol = [tuple(int(x) for x in row) for row in t[bad][:max_listed]]
    counts = {name: int(msk.sum()) for name, msk in zip("ABCD", (A, B, C, D))}
    counts["violations"] = int(bad.sum())
    return ExhaustiveReport(n=n, K=K, constants=c, total=int(len(t)), zero_sum=int(zero.sum()),
                            counts=counts, violations=viol, sharp=sharp)


_CSV_COLUMNS = ["n", "K", "c_A", "c_C", "c_D", "C_hl", "total", "zero_sum",
                "count_A", "count_B", "count_C", "count_D", "violations",
                "sharp_c_A", "sharp_c_C", "sharp_c_D"]


def write_exhaustive_csv(reports: Sequence[ExhaustiveReport], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_CSV_COLUMNS)
        for r in reports:
            c = r.constants
            w.writerow([r.n, r.K, repr(c.c_A), repr(c.cC(r.n)), repr(c.c_D), repr(c.C_hl),
                        r.total, r.zero_sum, r.counts["A"], r.counts["B"], r.counts["C"],
                        r.counts["D"], r.counts["violations"],
                        repr(r.sharp.get("c_A", float("nan"))),
                        repr(r.sharp.get("c_C", float("nan"))),
                        repr(r.sharp.get("c_D", float("nan")))])


Symbol = Callable[[np.ndarray], np.ndarray]
Domain = Callable[[np.ndarray], np.ndarray]


def symbol_ratio_sup(sym: Symbol, dom: Domain | None, n: int, K: int, s0: float, s1: float,
                     s2: float, eps: float = 0.0, mode: str = "with_dispersion",
                     variant: str = "symmetric", budget: int = MAX_TUPLES) -> SupResult:
    """Largest value of a multilinear-estimate ratio over a frequency box.

    ``mode="with_dispersion"``::

        |k|^{s0} |sym| / (<H_n>^{1/2} kmax_1^{s1} kmax_2^{s2})

    ``mode="without_dispersion"``::

        |k|^{s0} |sym| / (kmax_1^{s1-eps} (kmax_2 kmax_3 kmax_4)^{s2})

    ``variant="asymmetric"`` uses the forms for operators whose first slot
    carries the output frequency: ``|k|^{s0-s1}`` in the numerator (plus
    ``|k|^{eps}`` without dispersion), no ``kmax_1`` factor, and ``kmax_j``
    ranked among ``|k_2|..|k_n|`` only. ``<x> = (1 + x^2)^{1/2}``; tuples with
    ``k = 0`` are skipped.
    """
    if mode not in ("with_dispersion", "without_dispersion"):
        raise ValueError(f"unknown mode {mode!r}")
    if variant not in ("symmetric", "asymmetric"):
        raise ValueError(f"unknown variant {variant!r}")
    t = tuple_box(n, K, budget)
    k = t.sum(axis=1)
    t = t[k != 0]
    if dom is not None:
        t = t[np.asarray(dom(t), dtype=bool)]
    if len(t) == 0:
        return SupResult(0.0, None, True, 0)
    k = np.abs(t.sum(axis=1)).astype(float)
    sig = np.abs(np.asarray(sym(t)))
    if variant == "symmetric":
        m = kmax_sorted(t).astype(float)
        m1, m2, m3, m4 = m[:, 0], m[:, 1], m[:, 2], m[:, 3]
        lead = m1
        knum = k ** s0
    else:
        m = kmax_sorted(t[:, 1:], upto=3).astype(float)
        m2, m3, m4 = m[:, 0], m[:, 1], m[:, 2]
        lead = np.ones_like(k)
        knum = k ** (s0 - s1)
    if mode == "with_dispersion":
        H = h_n_array(t).astype(float)
        den = np.sqrt(np.sqrt(1.0 + H * H)) * m2 ** s2
        if variant == "symmetric":
            den = den * lead ** s1
    else:
        den = (m2 * m3 * m4) ** s2
        if variant == "symmetric":
            den = den * lead ** (s1 - eps)
        else:
            knum = knum * k ** eps
    ratio = knum * sig / den
    i = int(np.argmax(ratio))
    return SupResult(float(ratio[i]), tuple(int(x) for x in t[i]), False, int(len(t)))
