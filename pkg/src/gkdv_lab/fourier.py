"""Mean-zero real trigonometric polynomials on the torus [0, 2*pi).

A :class:`SpectralField` stores only the positive modes ``c_1 .. c_N``; the
negative modes follow from Hermitian symmetry ``c_{-k} = conj(c_k)`` and the
zero mode is absent. Products of fields are no longer mean-zero, so exact
powers are returned as a :class:`PaddedField` that keeps ``c_0``.

Norms omit the ``2*pi`` volume factor of the torus integral:

    ||u||_{H^s}^2 = sum_{k != 0} <k>^{2s} |c_k|^2,   <k> = (1 + k^2)^{1/2}.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import fft as sfft

__all__ = [
    "BudgetExceeded",
    "FieldError",
    "SpectralField",
    "PaddedField",
    "from_modes",
    "zero_field",
    "power",
    "sobolev_norm",
    "project",
    "free_flow",
    "translate",
    "random_sobolev",
    "dyadic_slope",
    "MAX_CUTOFF",
]

#: Default ceiling on the cutoff of any padded product.
MAX_CUTOFF = 1 << 16


class FieldError(ValueError):
    """Invalid mode data (zero mode, duplicates, broken conjugate pairs, NaN)."""


class BudgetExceeded(RuntimeError):
    """A computation would exceed its configured size budget."""


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Real mean-zero field ``u(x) = sum_{0 < |k| <= N} c_k e^{ikx}``.

    ``pos[k-1]`` holds ``c_k`` for ``k = 1..N``.
    """

    pos: np.ndarray

    def __post_init__(self):
        arr = np.array(self.pos, dtype=np.complex128).reshape(-1)
        if arr.size == 0:
            raise FieldError("a field needs at least one mode (N >= 1)")
        if not np.all(np.isfinite(arr)):
            raise FieldError("non-finite Fourier coefficient")
        arr.setflags(write=False)
        object.__setattr__(self, "pos", arr)

    @property
    def N(self) -> int:
        return self.pos.size

    def coeff(self, k: int) -> complex:
        if k == 0 or abs(k) > self.N:
            return 0j
        c = self.pos[abs(k) - 1]
        return complex(c) if k > 0 else complex(np.conj(c))

    def full(self, cutoff: int | None = None) -> np.ndarray:
        """Coefficients on ``k = -M..M`` (index ``k + M``), ``M = cutoff or N``."""
        M = self.N if cutoff is None else int(cutoff)
        out = np.zeros(2 * M + 1, dtype=np.complex128)
        m = min(M, self.N)
        out[M + 1:M + 1 + m] = self.pos[:m]
        out[M - m:M] = np.conj(self.pos[:m][::-1])
        return out

    @classmethod
    def from_full(cls, arr: np.ndarray, tol: float | None = None) -> "SpectralField":
        """Build from a centred array on ``-M..M``; the zero mode is dropped.

        If ``tol`` is given, Hermitian symmetry of ``arr`` is checked relative
        to its largest entry and a :class:`FieldError` raised on violation.
        """
        arr = np.asarray(arr, dtype=np.complex128)
        M = (arr.size - 1) // 2
        if arr.size != 2 * M + 1:
            raise FieldError("centred array must have odd length")
        if M == 0:
            return zero_field(1)
        pos = arr[M + 1:]
        if tol is not None:
            neg = arr[:M][::-1]
            scale = max(float(np.max(np.abs(arr))), 1e-300)
            if np.max(np.abs(neg - np.conj(pos))) > tol * scale:
                raise FieldError("array is not Hermitian-symmetric")
        return cls(pos.copy())

    def with_cutoff(self, M: int) -> "SpectralField":
        """Zero-pad or truncate to cutoff ``M``."""
        M = int(M)
        if M < 1:
            raise FieldError("cutoff must be >= 1")
        out = np.zeros(M, dtype=np.complex128)
        m = min(M, self.N)
        out[:m] = self.pos[:m]
        return SpectralField(out)

    def to_grid(self, L: int) -> np.ndarray:
        """Values at ``x_j = 2*pi*j/L``; requires ``L > 2N``."""
        if L <= 2 * self.N:
            raise FieldError("grid too coarse for exact sampling")
        spec = np.zeros(L // 2 + 1, dtype=np.complex128)
        spec[1:self.N + 1] = self.pos
        return sfft.irfft(spec, n=L) * L

    def ik(self) -> "SpectralField":
        """Spatial derivative."""
        return SpectralField(1j * np.arange(1, self.N + 1) * self.pos)

    def _binary(self, other, op):
        if not isinstance(other, SpectralField):
            return NotImplemented
        M = max(self.N, other.N)
        return SpectralField(op(self.with_cutoff(M).pos, other.with_cutoff(M).pos))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __neg__(self):
        return SpectralField(-self.pos)

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralField):
            return NotImplemented
        if np.iscomplexobj(scalar) and np.imag(scalar) != 0:
            raise FieldError("only real scalars keep a field real-valued")
        return SpectralField(float(np.real(scalar)) * self.pos)

    __rmul__ = __mul__

    def __repr__(self):
        return f"SpectralField(N={self.N})"


@dataclass(frozen=True, eq=False)
class PaddedField:
    """Real field with a zero mode; ``coeffs[k]`` holds ``c_k`` for ``k = 0..M``."""

    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=np.complex128).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise FieldError("non-finite Fourier coefficient")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def M(self) -> int:
        return self.coeffs.size - 1

    @property
    def mean(self) -> complex:
        return complex(self.coeffs[0])

    def coeff(self, k: int) -> complex:
        if abs(k) > self.M:
            return 0j
        c = self.coeffs[abs(k)]
        return complex(c) if k >= 0 else complex(np.conj(c))

    def full(self, cutoff: int | None = None) -> np.ndarray:
        M = self.M if cutoff is None else int(cutoff)
        out = np.zeros(2 * M + 1, dtype=np.complex128)
        m = min(M, self.M)
        out[M:M + m + 1] = self.coeffs[:m + 1]
        out[M - m:M] = np.conj(self.coeffs[1:m + 1][::-1])
        return out

    def mean_zero(self) -> SpectralField:
        """Drop the zero mode."""
        if self.M == 0:
            return zero_field(1)
        return SpectralField(self.coeffs[1:].copy())


def zero_field(N: int) -> SpectralField:
    return SpectralField(np.zeros(int(N), dtype=np.complex128))


def from_modes(entries: Iterable[tuple[int, complex]]) -> SpectralField:
    """Build a field from ``(k, c_k)`` pairs, completing conjugate mirrors."""
    given: dict[int, complex] = {}
    for k, c in entries:
        k = int(k)
        if k == 0:
            raise FieldError("zero mode forbidden (fields are mean-zero)")
        if k in given:
            raise FieldError(f"duplicate mode index {k}")
        given[k] = complex(c)
    if not given:
        raise FieldError("no modes given")
    N = max(abs(k) for k in given)
    pos = np.zeros(N, dtype=np.complex128)
    for k, c in given.items():
        if k > 0:
            if -k in given and not np.isclose(given[-k], np.conj(c), rtol=1e-12, atol=1e-15):
                raise FieldError(f"modes {k} and {-k} are not complex conjugates")
            pos[k - 1] = c
        elif -k not in given:
            pos[-k - 1] = np.conj(c)
    return SpectralField(pos)


def _fft_length(n_min: int) -> int:
    return sfft.next_fast_len(int(n_min), real=True)


def power(u: SpectralField, p: int, max_cutoff: int = MAX_CUTOFF) -> PaddedField:
    """Exact Fourier modes of ``u**p`` (cutoff ``p*N``).

    The product is formed on a zero-padded grid of length ``> 2*p*N`` so no
    mode aliases; the only error is floating-point rounding.
    """
    p = int(p)
    if p < 1:
        raise ValueError("power must be >= 1")
    M = p * u.N
    if M > max_cutoff:
        raise BudgetExceeded(f"power cutoff {M} exceeds budget {max_cutoff}")
    if p == 1:
        return PaddedField(np.concatenate([[0.0], u.pos]))
    L = _fft_length(2 * M + 1)
    vals = u.to_grid(L)
    spec = sfft.rfft(vals ** p) / L
    out = spec[:M + 1].copy()
    out[0] = out[0].real
    return PaddedField(out)


def _weights(N: int, s: float) -> np.ndarray:
    k = np.arange(1, N + 1, dtype=float)
    return (1.0 + k * k) ** s


def sobolev_norm(u: SpectralField, s: float) -> float:
    """``(sum_k <k>^{2s} |c_k|^2)^{1/2}`` over both signs of ``k``."""
    a2 = np.abs(u.pos) ** 2
    return float(np.sqrt(2.0 * np.sum(_weights(u.N, s) * a2)))


def project(u: SpectralField, K: int, band: str = "low") -> SpectralField:
    """Fourier restriction to ``|k| <= K`` (``band="low"``) or ``|k| > K``."""
    if K < 0:
        raise ValueError("band edge must be >= 0")
    keep = np.arange(1, u.N + 1) <= K
    if band == "high":
        keep = ~keep
    elif band != "low":
        raise ValueError(f"unknown band {band!r}")
    return SpectralField(np.where(keep, u.pos, 0))


def free_flow(u: SpectralField, t: float) -> SpectralField:
    """Airy group solving ``u_t + u_xxx = 0``: ``c_k -> c_k exp(i k^3 t)``."""
    k = np.arange(1, u.N + 1, dtype=float)
    return SpectralField(u.pos * np.exp(1j * k ** 3 * t))


def translate(u: SpectralField, h: float) -> SpectralField:
    """``u(x) -> u(x + h)``, i.e. ``c_k -> c_k exp(i k h)``."""
    k = np.arange(1, u.N + 1, dtype=float)
    return SpectralField(u.pos * np.exp(1j * k * h))


def random_sobolev(s: float, N: int, seed: int, delta: float = 0.05,
                   amplitude: float = 1.0) -> SpectralField:
    """Random-phase field with ``|c_k| = amplitude * <k>^{-s-1/2-delta}``.

    The profile sits in ``H^s`` but in no ``H^{s+2*delta}``; phases are drawn
    in increasing ``k`` from ``numpy.random.default_rng(seed)``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if delta <= 0:
        raise ValueError("delta must be positive")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=N)
    k = np.arange(1, N + 1, dtype=float)
    mag = amplitude * (1.0 + k * k) ** (-(s + 0.5 + delta) / 2.0)
    return SpectralField(mag * np.exp(1j * theta))


def dyadic_slope(u: SpectralField, kmin: int = 1, min_blocks: int = 5) -> float:
    """Log-log slope of the block-RMS mode modulus over dyadic blocks.

    Blocks are ``[2^j, 2^{j+1})`` intersected with ``[kmin, N]``; only full
    blocks are used. A profile ``|c_k| ~ k^{-a}`` gives slope ``-a``.
    Returns ``nan`` when fewer than ``min_blocks`` blocks are nonzero.
    """
    xs, ys = [], []
    j = 0
    while 2 ** (j + 1) - 1 <= u.N:
        lo, hi = 2 ** j, 2 ** (j + 1)
        if lo >= kmin:
            block = np.abs(u.pos[lo - 1:hi - 1])
            rms = np.sqrt(np.mean(block ** 2))
            if rms > 0:
                xs.append(np.log(np.sqrt(lo * (hi - 1))))
                ys.append(np.log(rms))
        j += 1
    if len(xs) < min_blocks:
        return float("nan")
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)
