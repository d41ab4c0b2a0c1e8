"""Initial profiles and closed-form solutions used as oracles."""

from __future__ import annotations

import numpy as np

from hnls.model import EquationParams
from hnls.spectral import Field, Grid


def gaussian(
    grid: Grid, amplitude: complex = 1.0, width: float = 1.0, center: float = 0.0,
    carrier: float = 0.0,
) -> Field:
    """``amplitude * exp(-(x - center)^2 / (2 width^2)) * exp(i carrier x)``."""
    x = grid.x
    return Field(grid, amplitude * np.exp(-((x - center) ** 2) / (2 * width**2))
                 * np.exp(1j * carrier * x))


def plane_wave_frequency(params: EquationParams, kappa: float, xi: float) -> float:
    """``Omega`` such that ``kappa exp(i(xi x - Omega t))`` solves the equation.

    Every term of the equation is a multiple of the plane wave, which gives
    ``Omega = -a xi^2 - b xi^3 + c kappa^2 + (d - e) kappa^2 xi``.
    """
    p = params
    k2 = abs(kappa) ** 2
    return -p.a * xi**2 - p.b * xi**3 + p.c * k2 + (p.d - p.e) * k2 * xi


def plane_wave(
    grid: Grid, kappa: complex, mode: int, params: EquationParams, t: float = 0.0
) -> Field:
    xi = mode * grid.dxi
    omega = plane_wave_frequency(params, kappa, xi)
    return Field(grid, kappa * np.exp(1j * (xi * grid.x - omega * t)))


def mkdv_soliton(
    grid: Grid, k: float, params: EquationParams, t: float = 0.0, center: float = 0.0
) -> Field:
    """Real sech soliton of ``u_t + b u_xxx + (d + e)|u|^2 u_x = 0``.

    ``u = sqrt(6 b / (d + e)) k sech(k (x - center - b k^2 t))``; for real data
    the ``d`` and ``e`` terms coincide, so only their sum matters.
    """
    p = params
    if p.a != 0 or p.c != 0:
        raise ValueError("sech soliton needs a = c = 0")
    gamma = p.d + p.e
    if p.b == 0 or gamma == 0 or p.b / gamma <= 0:
        raise ValueError(f"sech soliton needs b/(d+e) > 0, got b={p.b}, d+e={gamma}")
    amp = np.sqrt(6 * p.b / gamma) * k
    return Field(grid, amp / np.cosh(k * (grid.x - center - p.b * k**2 * t)) + 0j)
