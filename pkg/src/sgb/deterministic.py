"""Deterministic comparison bounds: x(t) <= G^{-1}(G(H) + A(t)).

For a nonnegative forcing level ``H``, a nondecreasing drift budget ``A``
and a nondecreasing rate ``eta``, any solution of the integral inequality
``x(t) <= H + integral eta(x) dA`` is dominated by the transformed envelope
``G^{-1}(G(H) + A(t))`` for as long as ``G(H) + A(t)`` stays inside the
range of ``G``.  The largest grid time for which it does is reported as the
valid horizon; past it the envelope blows up (finite-time explosion, e.g.
``eta(x) = x**2``) and no extrapolation is attempted.

A classical fixed-step RK4 integrator for the saturated ODE
``x' = eta(x) * A'(t)`` serves as the independent comparison oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .transforms import BoundTransform, DomainError, EtaSpec

__all__ = ["DetProblem", "BoundPath", "OdePath", "bihari_bound", "ode_comparison_oracle"]


@dataclass
class DetProblem:
    """A deterministic comparison problem on ``[0, T]``.

    ``a_times``/``a_values`` give the drift budget on a grid; ``A`` must be
    nondecreasing from ``A(0) = 0``.
    """

    transform: BoundTransform
    h: float
    a_times: np.ndarray
    a_values: np.ndarray

    def __post_init__(self) -> None:
        self.a_times = np.asarray(self.a_times, dtype=float)
        self.a_values = np.asarray(self.a_values, dtype=float)
        if self.h < 0:
            raise DomainError(f"forcing level H must be >= 0, got {self.h}")
        if self.a_times.ndim != 1 or self.a_times.shape != self.a_values.shape:
            raise DomainError("a_times and a_values must be matching 1-d grids")
        if self.a_times.size < 1 or self.a_times[0] != 0.0:
            raise DomainError("the budget grid must start at t=0")
        if np.any(np.diff(self.a_times) <= 0):
            raise DomainError("a_times must be strictly increasing")
        if abs(self.a_values[0]) > 0 or np.any(np.diff(self.a_values) < -1e-14):
            raise DomainError("A must be nondecreasing with A(0)=0")

    @staticmethod
    def from_callable(
        transform: BoundTransform,
        h: float,
        a_fn: Callable[[np.ndarray], np.ndarray],
        t_end: float,
        n_grid: int = 201,
    ) -> "DetProblem":
        if t_end <= 0:
            raise DomainError(f"T must be positive, got {t_end}")
        times = np.linspace(0.0, t_end, n_grid)
        return DetProblem(transform, h, times, np.asarray(a_fn(times), dtype=float))


@dataclass
class BoundPath:
    """Envelope values on the grid portion inside the range of G."""

    times: np.ndarray
    values: np.ndarray
    horizon: float  # largest grid time with G(H) + A(t) in range(G)


@dataclass
class OdePath:
    times: np.ndarray
    values: np.ndarray
    horizon: float  # time integration halted (ceiling hit), else T


def bihari_bound(prob: DetProblem) -> BoundPath:
    """Evaluate ``t -> G^{-1}(G(H) + A(t))`` on the grid of ``prob``.

    When ``G(H) = -inf`` (forcing at the divergent floor) the convention
    ``G^{-1}(-inf + a) = c0`` makes the envelope identically ``c0``.
    """
    t = prob.transform
    g_h = t.g(prob.h)
    lo, hi = t.domain_G_inv
    if g_h == -math.inf:
        values = np.full_like(prob.a_times, t.eta.c0)
        return BoundPath(prob.a_times.copy(), values, float(prob.a_times[-1]))
    y = g_h + prob.a_values
    inside = y < hi
    if not np.all(inside):
        n_ok = int(np.argmin(inside))  # first index outside
    else:
        n_ok = y.size
    if n_ok == 0:
        return BoundPath(prob.a_times[:0], prob.a_values[:0], -math.inf)
    times = prob.a_times[:n_ok]
    values = np.asarray(t.g_inv(y[:n_ok]), dtype=float)
    return BoundPath(times, np.atleast_1d(values), float(times[-1]))


def ode_comparison_oracle(
    eta: EtaSpec,
    h: float,
    a_prime: Callable[[float], float],
    t_end: float,
    dt: float = 1e-4,
    ceiling: float = 1e12,
) -> OdePath:
    """Classical RK4 solve of ``x' = eta(x) A'(t)``, ``x(0) = H``.

    Integration halts once the solution exceeds ``ceiling`` (or turns
    non-finite); the halt time is reported as the horizon.
    """
    if dt <= 0:
        raise DomainError(f"dt must be positive, got {dt}")
    if t_end <= 0:
        raise DomainError(f"T must be positive, got {t_end}")
    n = int(round(t_end / dt))
    times = [0.0]
    values = [float(h)]
    x = float(h)
    horizon = float(t_end)
    f = lambda s, v: float(eta.fn(v)) * float(a_prime(s))
    for i in range(n):
        s = i * dt
        k1 = f(s, x)
        k2 = f(s + 0.5 * dt, x + 0.5 * dt * k1)
        k3 = f(s + 0.5 * dt, x + 0.5 * dt * k2)
        k4 = f(s + dt, x + dt * k3)
        x = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(x) or x > ceiling:
            horizon = s + dt
            break
        times.append(s + dt)
        values.append(x)
    return OdePath(np.asarray(times), np.asarray(values), horizon)
