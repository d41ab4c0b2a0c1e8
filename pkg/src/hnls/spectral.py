"""Periodic 1-D Fourier discretization.

The box is ``[-L/2, L/2)`` sampled at ``n`` points.  Spectral coefficients are
scaled so that they approximate the unitary continuous transform

    u_hat(xi) = (2 pi)^(-1/2) * integral u(x) exp(-i xi x) dx

which makes the discrete Plancherel identity read

    sum |u_j|^2 dx == sum |u_hat_k|^2 dxi,    dxi = 2 pi / L.

Coefficient arrays are kept in numpy FFT order (``k = 0, 1, ..., -1``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

MAX_DERIVATIVE_ORDER = 3


class GridError(ValueError):
    """Invalid grid or field data."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-length/2, length/2)``."""

    n: int
    length: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 8:
            raise GridError(f"n must be an integer >= 8, got {self.n!r}")
        if self.n & (self.n - 1):
            raise GridError(f"n must be a power of two, got {self.n}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise GridError(f"length must be positive, got {self.length!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def dxi(self) -> float:
        return 2 * np.pi / self.length

    @cached_property
    def x(self) -> np.ndarray:
        return -0.5 * self.length + self.dx * np.arange(self.n)

    @cached_property
    def k(self) -> np.ndarray:
        """Signed integer mode index in FFT order; Nyquist is ``-n/2``."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)

    @cached_property
    def xi(self) -> np.ndarray:
        return self.dxi * self.k

    @cached_property
    def nyquist(self) -> np.ndarray:
        return self.k == -(self.n // 2)

    @cached_property
    def _phase(self) -> np.ndarray:
        # shifts the FFT origin from x[0] = -L/2 to x = 0
        return np.exp(-1j * self.xi * self.x[0])

    @property
    def scale(self) -> float:
        """Factor from raw ``np.fft.fft`` output to normalized coefficients."""
        return self.dx / np.sqrt(2 * np.pi)

    def mode_coefficient(self, amplitude: complex = 1.0) -> complex:
        """Coefficient of ``amplitude * exp(i xi_k x)`` in normalized units."""
        return amplitude * self.length / np.sqrt(2 * np.pi)

    # Raw array transforms.  Used directly by the time stepper; the Field and
    # Spectrum wrappers below go through these.

    def fft(self, values: np.ndarray) -> np.ndarray:
        return np.fft.fft(values) * (self.scale * self._phase)

    def ifft(self, coeffs: np.ndarray) -> np.ndarray:
        return np.fft.ifft(coeffs / (self.scale * self._phase))


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples ``u(x_j)`` on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n,):
            raise GridError(
                f"field has shape {values.shape}, grid needs ({self.grid.n},)"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid, func) -> "Field":
        return cls(grid, func(grid.x))

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.n, dtype=complex))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def __add__(self, other: "Field") -> "Field":
        _same_grid(self.grid, other.grid)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _same_grid(self.grid, other.grid)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, scalar: complex) -> "Field":
        return Field(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Normalized Fourier coefficients ``u_hat(xi_k)`` in FFT order."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != (self.grid.n,):
            raise GridError(
                f"spectrum has shape {coeffs.shape}, grid needs ({self.grid.n},)"
            )
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_modes(cls, grid: Grid, modes: dict[int, complex]) -> "Spectrum":
        """Spectrum of ``sum_k amp_k exp(i xi_k x)`` for integer mode indices."""
        coeffs = np.zeros(grid.n, dtype=complex)
        for k, amp in modes.items():
            if not -grid.n // 2 <= k < grid.n // 2:
                raise GridError(f"mode {k} not representable on n={grid.n}")
            coeffs[k % grid.n] = grid.mode_coefficient(amp)
        return cls(grid, coeffs)


def _same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        raise GridError(f"grid mismatch: {a} vs {b}")


def forward(field: Field) -> Spectrum:
    if not field.is_finite():
        bad = int(np.count_nonzero(~np.isfinite(field.values)))
        raise GridError(f"cannot transform field with {bad} non-finite samples")
    return Spectrum(field.grid, field.grid.fft(field.values))


def inverse(spectrum: Spectrum) -> Field:
    if not np.all(np.isfinite(spectrum.coeffs)):
        bad = int(np.count_nonzero(~np.isfinite(spectrum.coeffs)))
        raise GridError(f"cannot transform spectrum with {bad} non-finite modes")
    return Field(spectrum.grid, spectrum.grid.ifft(spectrum.coeffs))


def derivative_multiplier(grid: Grid, order: int) -> np.ndarray:
    """``(i xi)^order`` with the Nyquist mode zeroed for odd orders."""
    if order not in range(MAX_DERIVATIVE_ORDER + 1):
        raise ValueError(f"derivative order must be 0..3, got {order!r}")
    mult = (1j * grid.xi) ** order
    if order % 2:
        mult = np.where(grid.nyquist, 0, mult)
    return mult


def spectral_derivative(spectrum: Spectrum, order: int) -> Spectrum:
    return Spectrum(
        spectrum.grid, spectrum.coeffs * derivative_multiplier(spectrum.grid, order)
    )


def dealias_mask(grid: Grid) -> np.ndarray:
    # 2/3 rule: keep |k| <= n/3
    return 3 * np.abs(grid.k) <= grid.n


def dealias(spectrum: Spectrum) -> Spectrum:
    return Spectrum(spectrum.grid, np.where(dealias_mask(spectrum.grid), spectrum.coeffs, 0))


def frequency_truncate(spectrum: Spectrum, lam: float) -> Spectrum:
    """Sharp cutoff keeping ``|xi_k| <= lam``."""
    if not lam > 0:
        raise ValueError(f"truncation frequency must be positive, got {lam!r}")
    keep = np.abs(spectrum.grid.xi) <= lam
    return Spectrum(spectrum.grid, np.where(keep, spectrum.coeffs, 0))


def truncate_field(field: Field, lam: float) -> Field:
    return inverse(frequency_truncate(forward(field), lam))
