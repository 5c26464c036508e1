"""Dispersion map ``d(t) = d_av + d0(t / eps) / eps`` with the +-1 profile.

``d0`` is 2-periodic, +1 on [0, 1) and -1 on [1, 2).  Its antiderivative
``D`` is the triangle wave with range [0, 1].  Both are extended to negative
arguments by periodicity, which keeps ``D(tau) = int_0^tau d0`` valid on all
of the real line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def d0(tau):
    """Fast dispersion profile: +1 on [0,1), -1 on [1,2) modulo 2."""
    r = np.mod(tau, 2.0)
    out = np.where(r < 1.0, 1.0, -1.0)
    return out if np.ndim(out) else float(out)


def D(tau):
    """Closed-form antiderivative of ``d0`` (triangle wave, ``D(0) = 0``)."""
    r = np.mod(tau, 2.0)
    out = np.where(r <= 1.0, r, 2.0 - r)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class DispersionMap:
    d_av: float
    epsilon: float

    def __post_init__(self):
        if not math.isfinite(self.d_av):
            raise ValueError("d_av must be finite")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    def d(self, t):
        """Full dispersion coefficient at time ``t``."""
        return self.d_av + d0(np.asarray(t) / self.epsilon) / self.epsilon

    def frame_shift(self, t: float) -> float:
        """``D(t / eps)``: the free-propagation time linking the u and v frames."""
        return D(t / self.epsilon)


def integrated_dispersion(t0: float, t1: float, map: DispersionMap) -> float:
    """Exact ``int_{t0}^{t1} d(t) dt``."""
    eps = map.epsilon
    return map.d_av * (t1 - t0) + D(t1 / eps) - D(t0 / eps)


def breakpoints_in(t0: float, t1: float, epsilon: float) -> list[float]:
    """Sorted discontinuities ``k * epsilon`` strictly inside ``(t0, t1)``.

    Breakpoints closer than ``1e-12 * epsilon`` to an endpoint are treated as
    the endpoint itself.
    """
    if not t0 < t1:
        raise ValueError(f"need t0 < t1, got ({t0}, {t1})")
    tol = 1e-12
    k0 = math.floor(t0 / epsilon + tol) + 1
    k1 = math.ceil(t1 / epsilon - tol) - 1
    return [k * epsilon for k in range(k0, k1 + 1)]
