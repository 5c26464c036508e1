"""Periodic grid, unitary spectral transforms and the free Schroedinger group.

The real line is replaced by the torus ``[-L, L)`` sampled at ``N`` points.
All norms are computed in spectrum with the unitary DFT, so for a
band-limited field they agree with the continuum norms on the torus.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft


class ResolutionError(ValueError):
    """Field not resolved by the grid (spectral tail too large)."""


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform periodic grid on ``[-L, L)`` with ``N`` points."""

    L: float
    N: int
    x: np.ndarray = field(init=False, repr=False, compare=False)
    xi: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not np.isfinite(self.L) or self.L <= 0:
            raise ValueError(f"half width L must be positive, got {self.L}")
        if int(self.N) != self.N or self.N % 2 or self.N < 8:
            raise ValueError(f"N must be an even integer >= 8, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        x = -self.L + self.dx * np.arange(self.N)
        # FFT ordering: 0, 1, ..., N/2-1, -N/2, ..., -1 (times pi/L)
        xi = (np.pi / self.L) * sfft.fftfreq(self.N, d=1.0 / self.N)
        x.setflags(write=False)
        xi.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xi", xi)

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def xi_max(self) -> float:
        return np.pi * self.N / (2.0 * self.L)

    def is_grid_wavenumber(self, k: float) -> bool:
        j = k * self.L / np.pi
        return abs(j - round(j)) < 1e-9 and -self.N // 2 <= round(j) < self.N // 2


def make_grid(L: float, N: int) -> SpatialGrid:
    return SpatialGrid(float(L), N)


@dataclass(frozen=True)
class ComplexField:
    """Complex samples of a field on ``grid`` at physical time ``time``.

    The time tag is metadata: operators in this module never change it.
    """

    grid: SpatialGrid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.N,):
            raise ValueError(
                f"field has shape {values.shape}, grid expects ({self.grid.N},)")
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite samples")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def with_values(self, values, time=None) -> "ComplexField":
        return ComplexField(self.grid, values, self.time if time is None else time)

    def __add__(self, other):
        return self.with_values(self.values + _values(other))

    def __sub__(self, other):
        return self.with_values(self.values - _values(other))

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__


def _values(f):
    return f.values if isinstance(f, ComplexField) else np.asarray(f)


# --- transforms -----------------------------------------------------------

def fft(values: np.ndarray, axis: int = -1) -> np.ndarray:
    return sfft.fft(values, axis=axis, norm="ortho")


def ifft(coeffs: np.ndarray, axis: int = -1) -> np.ndarray:
    return sfft.ifft(coeffs, axis=axis, norm="ortho")


def to_spectrum(f: ComplexField) -> np.ndarray:
    """Unitary DFT coefficients of ``f`` in FFT ordering."""
    return fft(f.values)


def from_spectrum(coeffs: np.ndarray, grid: SpatialGrid, time: float = 0.0) -> ComplexField:
    coeffs = np.asarray(coeffs)
    if coeffs.shape != (grid.N,):
        raise ValueError(f"spectrum has shape {coeffs.shape}, grid expects ({grid.N},)")
    return ComplexField(grid, ifft(coeffs), time)


def propagator_symbol(grid: SpatialGrid, t) -> np.ndarray:
    """Fourier multiplier ``exp(-i xi^2 t)`` of ``T_t = exp(i t d_x^2)``.

    ``t`` may be an array, in which case the result has shape ``t.shape + (N,)``.
    """
    t = np.asarray(t, dtype=float)
    return np.exp(-1j * grid.xi**2 * t[..., None]) if t.ndim else np.exp(-1j * grid.xi**2 * float(t))


def free_propagate(f: ComplexField, t: float) -> ComplexField:
    """Apply the free Schroedinger group ``T_t``; the time tag is kept."""
    if not np.isfinite(t):
        raise ValueError("propagation time must be finite")
    if t == 0:
        return f
    return f.with_values(ifft(fft(f.values) * propagator_symbol(f.grid, t)))


# --- norms and functionals ------------------------------------------------

def sobolev_norm_hat(coeffs: np.ndarray, grid: SpatialGrid, s: float = 1.0, axis: int = -1):
    """H^s norm from unitary spectral coefficients (continuum measure)."""
    weight = (1.0 + grid.xi**2) ** s
    if axis != -1:
        coeffs = np.moveaxis(coeffs, axis, -1)
    return np.sqrt(grid.dx * np.sum(weight * np.abs(coeffs) ** 2, axis=-1))


def sobolev_norm(f: ComplexField, s: float = 1.0) -> float:
    """Discrete ``||f||_{H^s}`` with multiplier ``(1 + xi^2)^(s/2)``."""
    if not np.isfinite(s) or s < 0:
        raise ValueError(f"Sobolev index must be finite and >= 0, got {s}")
    return float(sobolev_norm_hat(to_spectrum(f), f.grid, s))


def l2_norm(f: ComplexField) -> float:
    return float(np.sqrt(f.grid.dx * np.sum(np.abs(f.values) ** 2)))


def mass(f: ComplexField) -> float:
    return float(f.grid.dx * np.sum(np.abs(f.values) ** 2))


def averaged_energy(f: ComplexField, alpha: float, d_av: float, quadrature) -> float:
    """Hamiltonian of the averaged equation.

    ``E(v) = d_av/2 ||v_x||^2 - 1/(alpha+2) int_0^1 ||T_r v||_{alpha+2}^{alpha+2} dr``
    with the r-integral evaluated by ``quadrature``.
    """
    grid = f.grid
    fh = fft(f.values)
    kinetic = 0.5 * d_av * grid.dx * np.sum(grid.xi**2 * np.abs(fh) ** 2)
    frames = ifft(fh[None, :] * propagator_symbol(grid, quadrature.nodes), axis=-1)
    potential = grid.dx * np.sum(np.abs(frames) ** (alpha + 2), axis=-1)
    return float(kinetic - quadrature.weights @ potential / (alpha + 2))


def spectral_tail(f: ComplexField, fraction: float = 0.8) -> float:
    """Largest ``|f_hat|`` on ``|xi| >= fraction * xi_max`` relative to the peak."""
    fh = np.abs(to_spectrum(f))
    peak = fh.max()
    if peak == 0:
        return 0.0
    return float(fh[np.abs(f.grid.xi) >= fraction * f.grid.xi_max].max() / peak)


def boundary_amplitude(f: ComplexField, width: float = 0.05) -> float:
    """Largest ``|f|`` within ``width * L`` of the torus seam, relative to the peak."""
    a = np.abs(f.values)
    peak = a.max()
    if peak == 0:
        return 0.0
    near = np.abs(f.grid.x) >= (1.0 - width) * f.grid.L
    return float(a[near].max() / peak)


# --- initial data -----------------------------------------------------------

@dataclass(frozen=True)
class InitialDatum:
    """Parametric initial datum.

    kind is one of ``gaussian``, ``sech``, ``single_mode``.  For
    ``single_mode`` the amplitude is the (complex) coefficient ``c`` and
    ``carrier`` the wavenumber ``k``.
    """

    kind: str = "gaussian"
    amplitude: complex = 1.0
    width: float = 1.0
    chirp: float = 0.0
    center: float = 0.0
    carrier: float = 0.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "sech", "single_mode"):
            raise ValueError(f"unknown initial datum kind {self.kind!r}")
        if self.kind != "single_mode" and not self.width > 0:
            raise ValueError(f"width must be positive, got {self.width}")


def gaussian(amplitude=1.0, width=1.0, chirp=0.0, center=0.0, carrier=0.0) -> InitialDatum:
    return InitialDatum("gaussian", amplitude, width, chirp, center, carrier)


def sech(amplitude=1.0, width=1.0) -> InitialDatum:
    return InitialDatum("sech", amplitude, width)


def single_mode(c=1.0, k=0.0) -> InitialDatum:
    return InitialDatum("single_mode", c, carrier=k)


def sample_initial_datum(datum: InitialDatum, grid: SpatialGrid, tail_tol: float = 1e-12) -> ComplexField:
    """Sample ``datum`` on ``grid`` at time 0 and check it is resolved."""
    x = grid.x
    if datum.kind == "gaussian":
        y = (x - datum.center) / datum.width
        values = datum.amplitude * np.exp(-0.5 * (1 + 1j * datum.chirp) * y**2 + 1j * datum.carrier * x)
    elif datum.kind == "sech":
        values = datum.amplitude / np.cosh((x - datum.center) / datum.width) * np.exp(1j * datum.carrier * x)
    else:
        if not grid.is_grid_wavenumber(datum.carrier):
            raise ValueError(
                f"wavenumber {datum.carrier} is not on the grid (multiples of pi/L = {np.pi / grid.L})")
        values = datum.amplitude * np.exp(1j * datum.carrier * x)
    f = ComplexField(grid, values, 0.0)
    tail = spectral_tail(f)
    if tail > tail_tol:
        raise ResolutionError(f"initial datum under-resolved: spectral tail {tail:.3e} > {tail_tol:.0e}")
    return f
