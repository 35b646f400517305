"""Phase-shift gauge removing the first-order resonant term.

With ``Phi(t) = int_0^t sum_j a_j d_j (u^{d_j-1})_0 dt'`` the gauged field

    u~_k(t) = u_k(t) exp(-ik Phi(t)),   i.e.   u~(t, x) = u(t, x - Phi(t)),

solves the equation with ``R1`` removed. The inverse is the translation
``u(t, x) = u~(t, x + Phi(t))``. Spatial integrals of powers are translation
invariant, so ``Phi`` can be computed from either field.

``(u^p)_0`` is the zero Fourier coefficient, i.e. the spatial mean; the torus
integral is ``2*pi`` times it (see :func:`mean_power`).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .fourier import SpectralField, power, translate
from .nonlinearity import PolyNonlinearity, resonant_rate

__all__ = ["Trajectory", "mean_power", "phase_rates", "gauge_forward", "gauge_inverse"]


@dataclass
class Trajectory:
    """Time samples of a field with the accumulated gauge phase."""

    times: np.ndarray
    states: list
    phase: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or len(self.times) != len(self.states):
            raise ValueError("times and states must have equal length")
        if len(self.times) == 0:
            raise ValueError("empty trajectory")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if self.phase is None:
            self.phase = np.zeros(len(self.times))
        self.phase = np.asarray(self.phase, dtype=float)
        if len(self.phase) != len(self.times):
            raise ValueError("phase length mismatch")

    def __len__(self):
        return len(self.times)

    def final(self) -> SpectralField:
        return self.states[-1]


def mean_power(u: SpectralField, p: int, tol: float = 1e-13) -> float:
    """``int_T u^p dx = 2*pi (u^p)_0``."""
    c0 = power(u, p).mean
    scale = max(1.0, abs(c0.real))
    if abs(c0.imag) > tol * scale:
        raise ValueError("zero mode of u^p is not real (broken Hermitian symmetry)")
    return 2.0 * np.pi * c0.real


def phase_rates(states, P: PolyNonlinearity) -> np.ndarray:
    """``Phi'(t)`` at each sample."""
    return np.array([resonant_rate(u, P) for u in states])


def _phase(traj: Trajectory, P: PolyNonlinearity) -> np.ndarray:
    rates = phase_rates(traj.states, P)
    if len(rates) == 1:
        return np.zeros(1)
    return cumulative_trapezoid(rates, traj.times, initial=0.0)


def gauge_forward(traj: Trajectory, P: PolyNonlinearity) -> Trajectory:
    """``u -> u~`` sample-wise, ``u~(t) = translate(u(t), -Phi(t))``."""
    phi = _phase(traj, P)
    states = [translate(u, -p) for u, p in zip(traj.states, phi)]
    return Trajectory(traj.times.copy(), states, phi, dict(traj.diagnostics))


def gauge_inverse(traj: Trajectory, P: PolyNonlinearity) -> Trajectory:
    """``u~ -> u`` sample-wise, ``u(t) = translate(u~(t), Phi(t))``."""
    phi = _phase(traj, P)
    states = [translate(u, p) for u, p in zip(traj.states, phi)]
    return Trajectory(traj.times.copy(), states, phi, dict(traj.diagnostics))
