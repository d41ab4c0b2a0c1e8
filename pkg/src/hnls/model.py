"""Coefficients, nonlinearity, free propagator and gauge maps.

The evolution equation is

    u_t + i a u_xx + b u_xxx + i c |u|^2 u + d |u|^2 u_x + e u^2 conj(u)_x = 0.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from hnls.spectral import (
    Field,
    Grid,
    dealias_mask,
    derivative_multiplier,
    forward,
    inverse,
    Spectrum,
)


class GaugeError(ValueError):
    """A gauge transformation is undefined for the given coefficients or grid."""


@dataclass(frozen=True)
class EquationParams:
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0
    e: float = 0.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not np.isfinite(value):
                raise ValueError(f"coefficient {name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))

    @property
    def has_energy(self) -> bool:
        """True when the second invariant exists (``b e != 0``)."""
        return self.b * self.e != 0

    @property
    def dispersive(self) -> bool:
        return self.b != 0

    @property
    def coefficients(self) -> "ConservedCoefficients":
        return ConservedCoefficients.from_params(self)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class ConservedCoefficients:
    C1: float
    C2: float
    C3: float
    a0: float

    @classmethod
    def from_params(cls, p: EquationParams) -> "ConservedCoefficients":
        return cls(
            C1=3 * p.b * p.e,
            C2=-p.e * (p.e + p.d) / 2,
            C3=3 * p.b * p.c - p.a * (p.d + p.e),
            a0=2 * abs(p.a) + 3 * abs(p.b) + abs(p.d + p.e) / 2,
        )


def linear_symbol(params: EquationParams, xi):
    """Dispersion relation ``a xi^2 + b xi^3`` of the free flow."""
    return params.a * xi**2 + params.b * xi**3


def grid_symbol(grid: Grid, params: EquationParams) -> np.ndarray:
    """Free-flow symbol on a grid, consistent with `derivative_multiplier`.

    The cubic term is dropped at the Nyquist mode, exactly as the third
    derivative is, so the propagator and the residual share one operator.
    """
    cubic = np.where(grid.nyquist, 0.0, grid.xi**3)
    return params.a * grid.xi**2 + params.b * cubic


def nonlinear_spectrum(
    grid: Grid, u_hat: np.ndarray, params: EquationParams, dealias: bool = True
) -> np.ndarray:
    """Normalized coefficients of F(u), given those of u; 2/3-dealiased by default."""
    u = grid.ifft(u_hat)
    mod2 = u.real**2 + u.imag**2
    f = 1j * params.c * mod2 * u
    if params.d != 0 or params.e != 0:
        ux = grid.ifft(u_hat * derivative_multiplier(grid, 1))
        f = f + params.d * mod2 * ux + params.e * u * u * np.conj(ux)
    f_hat = grid.fft(f)
    return np.where(dealias_mask(grid), f_hat, 0) if dealias else f_hat


def nonlinearity(u: Field, params: EquationParams) -> Field:
    if not u.is_finite():
        raise ValueError("nonlinearity called on a non-finite field")
    return Field(u.grid, u.grid.ifft(nonlinear_spectrum(u.grid, u.grid.fft(u.values), params)))


def apply_group(u: Field, t: float, params: EquationParams) -> Field:
    """Free propagator: multiply the spectrum by ``exp(i t phi(xi))``."""
    if t == 0:
        return Field(u.grid, u.values.copy())
    grid = u.grid
    phase = np.exp(1j * t * grid_symbol(grid, params))
    return Field(grid, grid.ifft(grid.fft(u.values) * phase))


def gauge_remove_C3(params: EquationParams) -> tuple[EquationParams, float]:
    """Coefficient map of the gauge that eliminates the ``C3`` term.

    Returns the transformed coefficients ``(a + 3 alpha b, b, c - alpha(e - d), d, e)``
    and ``alpha = C3 / (6 b e)``.
    """
    if not params.has_energy:
        raise GaugeError(f"gauge needs b*e != 0, got b={params.b}, e={params.e}")
    p = params
    alpha = (3 * p.b * p.c - p.a * (p.d + p.e)) / (6 * p.b * p.e)
    if alpha == 0:
        return params, 0.0
    new = EquationParams(p.a + 3 * alpha * p.b, p.b, p.c - alpha * (p.e - p.d), p.d, p.e)
    return new, alpha


def mkdv_reduction_condition(params: EquationParams) -> float:
    """``c - (d - e) a / (3 b)``; zero when the mKdV gauge applies."""
    if not params.dispersive:
        raise GaugeError("mKdV reduction needs b != 0")
    p = params
    return p.c - (p.d - p.e) * p.a / (3 * p.b)


def admissible_phase_a(grid: Grid, params: EquationParams) -> float:
    """Nearest ``a`` for which ``exp(i a x / 3b)`` is periodic on the box."""
    m = round(params.a / (3 * params.b) / grid.dxi)
    return 3 * params.b * m * grid.dxi


def gauge_to_mkdv(
    u: Field, t: float, params: EquationParams, tol: float = 1e-10
) -> tuple[Field, EquationParams]:
    """Map a solution at time ``t`` to the complex-mKdV frame.

    ``v(x, t) = exp(i (a/3b) x + i (a^3/27b^2) t) u(x + (a^2/3b) t, t)``, the
    shift applied exactly as a Fourier phase.  The phase wavenumber ``a/3b``
    must be a grid wavenumber.
    """
    p = params
    gap = mkdv_reduction_condition(p)
    if abs(gap) > tol:
        raise GaugeError(f"reduction needs c = (d-e)a/(3b); off by {gap:.3e}")
    reduced = EquationParams(0.0, p.b, 0.0, p.d, p.e)
    grid = u.grid
    kappa = p.a / (3 * p.b)
    m = kappa / grid.dxi
    if abs(m - round(m)) > 1e-9 * max(1.0, abs(m)):
        raise GaugeError(
            f"a/3b = {kappa:.6g} is not a multiple of 2pi/L = {grid.dxi:.6g}; "
            f"nearest admissible a = {admissible_phase_a(grid, p):.12g}"
        )
    shift = p.a**2 / (3 * p.b) * t
    shifted = inverse(Spectrum(grid, forward(u).coeffs * np.exp(1j * grid.xi * shift)))
    phase = np.exp(1j * (kappa * grid.x + p.a**3 / (27 * p.b**2) * t))
    return Field(grid, phase * shifted.values), reduced


def residual(trajectory, params: EquationParams) -> np.ndarray:
    """L2 norm of the equation residual at each interior frame.

    ``u_t`` is a centered difference over neighbouring frames, which must be
    uniformly spaced; spatial terms are spectral.
    """
    times = np.asarray(trajectory.times, dtype=float)
    frames = trajectory.frames
    if len(frames) < 3:
        raise ValueError(f"residual needs at least 3 frames, got {len(frames)}")
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise ValueError("residual needs uniformly spaced frames")
    dt = steps[0]
    grid = frames[0].grid
    d2 = derivative_multiplier(grid, 2)
    d3 = derivative_multiplier(grid, 3)
    out = np.empty(len(frames) - 2)
    for j in range(1, len(frames) - 1):
        u = frames[j].values
        u_hat = grid.fft(u)
        ut = (frames[j + 1].values - frames[j - 1].values) / (2 * dt)
        linear = grid.ifft(u_hat * (1j * params.a * d2 + params.b * d3))
        nl = grid.ifft(nonlinear_spectrum(grid, u_hat, params))
        r = ut + linear + nl
        out[j - 1] = np.sqrt(np.sum(np.abs(r) ** 2) * grid.dx)
    return out
