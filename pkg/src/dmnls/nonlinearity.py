"""Power nonlinearity, its frame-conjugated form Q and the averaged operator <Q>.

    Q(s, f)   = T_{D(s)}^{-1} (|T_{D(s)} f|^alpha T_{D(s)} f)
    <Q>(f)    = int_0^1 T_r^{-1} (|T_r f|^alpha T_r f) dr
    QQ(th, f) = int_0^th [Q(s, f) - <Q>(f)] ds

The ``*_hat`` functions work on unitary spectral coefficients and accept a
leading batch axis; the field-level wrappers are thin conveniences.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dispersion import D
from .spectral import ComplexField, SpatialGrid, fft, ifft, propagator_symbol


@dataclass(frozen=True)
class Quadrature:
    """Nodes and weights for ``int_0^1 g(r) dr``; weights sum to one."""

    kind: str
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def count(self) -> int:
        return len(self.nodes)


def make_quadrature(kind: str = "gauss_legendre", n_r: int = 24) -> Quadrature:
    if int(n_r) != n_r:
        raise ValueError(f"node count must be an integer, got {n_r}")
    n_r = int(n_r)
    if kind == "gauss_legendre":
        if n_r < 2:
            raise ValueError(f"Gauss-Legendre needs at least 2 nodes, got {n_r}")
        x, w = np.polynomial.legendre.leggauss(n_r)
        nodes, weights = 0.5 * (x + 1.0), 0.5 * w
    elif kind == "composite_simpson":
        if n_r < 3 or n_r % 2 == 0:
            raise ValueError(f"composite Simpson needs an odd node count >= 3, got {n_r}")
        nodes = np.linspace(0.0, 1.0, n_r)
        weights = np.ones(n_r)
        weights[1:-1:2] = 4.0
        weights[2:-1:2] = 2.0
        weights /= 3.0 * (n_r - 1)
    else:
        raise ValueError(f"unknown quadrature kind {kind!r}")
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return Quadrature(kind, nodes, weights)


def gauss_panels(breaks, n_gauss: int = 4):
    """Composite Gauss-Legendre nodes/weights over consecutive ``breaks``."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = np.polynomial.legendre.leggauss(n_gauss)
    a, b = breaks[:-1, None], breaks[1:, None]
    nodes = 0.5 * (b - a) * x + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w
    return nodes.ravel(), weights.ravel()


# --- pointwise nonlinearity ---------------------------------------------------

def _power(u: np.ndarray, alpha: float) -> np.ndarray:
    """``|u|^alpha u`` with ``0^alpha * 0 = 0``."""
    if alpha == 2:
        return (u.real**2 + u.imag**2) * u
    if float(alpha).is_integer() and alpha % 2 == 0:
        return (u.real**2 + u.imag**2) ** int(alpha // 2) * u
    a = np.abs(u)
    with np.errstate(divide="ignore"):
        mod = np.exp(alpha * np.log(a))
    return np.where(a > 0, mod, 0.0) * u


def power_nl(f: ComplexField, alpha: float) -> ComplexField:
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return f.with_values(_power(f.values, alpha))


# --- frame-conjugated nonlinearity ----------------------------------------------

def conjugated_power_hat(fh: np.ndarray, grid: SpatialGrid, shifts, alpha: float) -> np.ndarray:
    """``T_{-r}(|T_r f|^alpha T_r f)`` in spectrum for every shift ``r``.

    Returns an array of shape ``(len(shifts), N)`` (or ``(N,)`` for scalar r).
    """
    sym = propagator_symbol(grid, shifts)
    return np.conj(sym) * fft(_power(ifft(fh * sym), alpha))


def weighted_frame_sum(fh, grid, shifts, weights, alpha, chunk: int = 128) -> np.ndarray:
    """``sum_m w_m T_{-r_m}(|T_{r_m} f|^alpha T_{r_m} f)`` in spectrum, chunked over m.

    Partial sums are accumulated in ascending node order so the result is
    reproducible bit for bit.
    """
    shifts = np.atleast_1d(shifts)
    out = np.zeros(fh.shape[-1:], dtype=complex)
    for start in range(0, len(shifts), chunk):
        sl = slice(start, start + chunk)
        out += weights[sl] @ conjugated_power_hat(fh, grid, shifts[sl], alpha)
    return out


def Q_hat(s: float, fh: np.ndarray, grid: SpatialGrid, alpha: float) -> np.ndarray:
    return conjugated_power_hat(fh, grid, D(s), alpha)


def Q(s: float, f: ComplexField, alpha: float) -> ComplexField:
    """``Q(s, f)``; exactly 2-periodic in ``s``."""
    return f.with_values(ifft(Q_hat(s, fft(f.values), f.grid, alpha)))


def avg_Q_hat(fh: np.ndarray, grid: SpatialGrid, alpha: float, quadrature: Quadrature) -> np.ndarray:
    return weighted_frame_sum(fh, grid, quadrature.nodes, quadrature.weights, alpha)


def avg_Q(f: ComplexField, alpha: float, quadrature: Quadrature) -> ComplexField:
    """Averaged nonlinearity ``<Q>(f)`` by quadrature in the frame variable."""
    return f.with_values(ifft(avg_Q_hat(fft(f.values), f.grid, alpha, quadrature)))


def tau_average_Q(f: ComplexField, alpha: float, panels: int = 64, n_gauss: int = 4) -> ComplexField:
    """``1/2 int_0^2 Q(tau, f) dtau`` with kink-aligned composite Gauss rules.

    Independent route to ``<Q>``: it integrates over the fast time ``tau``
    instead of the frame variable ``r = D(tau)``.
    """
    half = max(1, panels // 2)
    breaks = np.concatenate([np.linspace(0, 1, half + 1), np.linspace(1, 2, half + 1)[1:]])
    nodes, weights = gauss_panels(breaks, n_gauss)
    total = weighted_frame_sum(fft(f.values), f.grid, D(nodes), weights, alpha)
    return f.with_values(ifft(0.5 * total))


def cumulative_Q(theta: float, f: ComplexField, alpha: float, tau_steps: int = 512,
                 quadrature: Quadrature | None = None, n_gauss: int = 4) -> ComplexField:
    """``QQ(theta, f) = int_0^theta [Q(s, f) - <Q>(f)] ds``.

    The s-integral uses ``tau_steps`` uniform panels (split at the kinks of
    ``D`` at integers) with ``n_gauss`` Gauss points each.
    """
    if theta < 0:
        raise ValueError(f"theta must be non-negative, got {theta}")
    if theta == 0:
        return f.with_values(np.zeros_like(f.values))
    quadrature = quadrature or make_quadrature()
    fh = fft(f.values)
    breaks = np.union1d(np.linspace(0.0, theta, tau_steps + 1), np.arange(1.0, np.ceil(theta)))
    nodes, weights = gauss_panels(breaks, n_gauss)
    integral = weighted_frame_sum(fh, f.grid, D(nodes), weights, alpha)
    return f.with_values(ifft(integral - theta * avg_Q_hat(fh, f.grid, alpha, quadrature)))
