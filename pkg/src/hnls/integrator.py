"""Integrating-factor RK4 time stepping.

The linear part is removed exactly by working with ``w(t) = U(-t) u(t)``,
which obeys ``w' = -U(-t) F(U(t) w)``; classical RK4 is applied to ``w``.
Everything runs on normalized spectral coefficients.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from hnls.model import EquationParams, grid_symbol, nonlinear_spectrum
from hnls.norms import DiagnosticsRecord, diagnose
from hnls.spectral import Field, Grid

log = logging.getLogger(__name__)

BLOWUP_THRESHOLD = 1e12


class BlowUpError(RuntimeError):
    """Non-finite or runaway state; carries the last good frame."""

    def __init__(self, message: str, last_frame: Field, last_time: float):
        super().__init__(message)
        self.last_frame = last_frame
        self.last_time = last_time


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_end: float
    dealias: bool = True
    record_every: int = 1
    boundary_guard: float = 1e-8
    thetas: tuple[float, ...] = ()

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not np.isfinite(self.t_end):
            raise ValueError(f"t_end must be finite, got {self.t_end!r}")
        if self.t_end != 0 and self.dt > abs(self.t_end):
            raise ValueError(f"dt={self.dt} exceeds |t_end|={abs(self.t_end)}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError(f"record_every must be a positive integer, got {self.record_every!r}")
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))

    @property
    def n_steps(self) -> int:
        return math.ceil(abs(self.t_end) / self.dt - 1e-9) if self.t_end else 0

    @property
    def signed_dt(self) -> float:
        """Step actually taken: ``t_end / n_steps`` (negative for backward runs)."""
        return self.t_end / self.n_steps if self.n_steps else 0.0


def stable_dt(u: Field, c_nl: float = 0.5) -> float:
    """Step-size guideline ``c_nl / max(1, sup|u|^2 max|xi|)``."""
    return c_nl / max(1.0, float(np.max(np.abs(u.values)) ** 2 * np.max(np.abs(u.grid.xi))))


@dataclass
class Trajectory:
    times: np.ndarray
    frames: list[Field]
    diagnostics: list[DiagnosticsRecord] = field(default_factory=list)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) != len(self.frames):
            raise ValueError("times and frames differ in length")
        if len(self.times) > 1:
            steps = np.diff(self.times)
            if not (np.all(steps > 0) or np.all(steps < 0)):
                raise ValueError("trajectory times must be strictly monotone")
        grids = {f.grid for f in self.frames}
        if len(grids) > 1:
            raise ValueError("trajectory frames live on different grids")

    @property
    def grid(self) -> Grid:
        return self.frames[0].grid

    def __len__(self) -> int:
        return len(self.frames)

    def values(self) -> np.ndarray:
        return np.stack([f.values for f in self.frames])


class _Stepper:
    """Precomputed multipliers for one (grid, params, dt) combination."""

    def __init__(self, grid: Grid, params: EquationParams, dt: float, dealias: bool = True):
        self.grid = grid
        self.params = params
        self.dt = dt
        self.half = np.exp(0.5j * dt * grid_symbol(grid, params))
        self.full = self.half * self.half
        self.dealias = dealias

    def rhs(self, u_hat: np.ndarray) -> np.ndarray:
        return -nonlinear_spectrum(self.grid, u_hat, self.params, self.dealias)

    def __call__(self, u_hat: np.ndarray) -> np.ndarray:
        dt, E, E2 = self.dt, self.half, self.full
        k1 = self.rhs(u_hat)
        k2 = self.rhs(E * (u_hat + 0.5 * dt * k1))
        k3 = self.rhs(E * u_hat + 0.5 * dt * k2)
        k4 = self.rhs(E2 * u_hat + dt * E * k3)
        return E2 * (u_hat + dt / 6 * k1) + dt / 6 * (2 * E * (k2 + k3) + k4)


def _check(u_hat: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(u_hat)) and np.max(np.abs(u_hat)) <= BLOWUP_THRESHOLD)


def step(u: Field, t: float, dt: float, params: EquationParams, dealias: bool = True) -> Field:
    """Advance ``u`` from ``t`` to ``t + dt`` (``dt`` may be negative).

    The scheme is autonomous, so ``t`` only labels the blow-up diagnostic.
    """
    if dt == 0:
        raise ValueError("dt must be nonzero")
    grid = u.grid
    with np.errstate(over="ignore", invalid="ignore"):
        out = _Stepper(grid, params, dt, dealias)(grid.fft(u.values))
    if not _check(out):
        raise BlowUpError(f"state blew up stepping from t={t:g}", u, t)
    return Field(grid, grid.ifft(out))


def evolve(u0: Field, params: EquationParams, config: SolverConfig) -> Trajectory:
    """Integrate from ``t = 0`` to ``config.t_end``, recording every few steps.

    The final time is always recorded.  Diagnostics include the weighted norms
    for ``config.thetas``.
    """
    if not u0.is_finite():
        raise ValueError("initial field has non-finite samples")
    grid = u0.grid
    n_steps = config.n_steps
    dt = config.signed_dt
    thetas = config.thetas

    def record(u_hat, t):
        frame = Field(grid, grid.ifft(u_hat))
        diag = diagnose(frame, t, params, thetas)
        if diag.edge_mass > config.boundary_guard and not warned:
            warned.append(t)
            log.warning("edge mass %.3e exceeds guard %.1e at t=%g (reported once per run)",
                        diag.edge_mass, config.boundary_guard, t)
        times.append(t)
        frames.append(frame)
        diagnostics.append(diag)

    times: list[float] = []
    frames: list[Field] = []
    diagnostics: list[DiagnosticsRecord] = []
    warned: list[float] = []
    u_hat = grid.fft(u0.values)
    record(u_hat, 0.0)
    if n_steps == 0:
        return Trajectory(times, frames, diagnostics)

    stepper = _Stepper(grid, params, dt, config.dealias)
    for j in range(1, n_steps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            new = stepper(u_hat)
        if not _check(new):
            t_last = (j - 1) * dt
            raise BlowUpError(
                f"state blew up after t={t_last:g} (step {j} of {n_steps})",
                Field(grid, grid.ifft(u_hat)), t_last,
            )
        u_hat = new
        if j % config.record_every == 0 or j == n_steps:
            record(u_hat, j * dt)
    return Trajectory(times, frames, diagnostics)
