"""Sobolev, weighted and mixed space-time norms, plus the two invariants.

Sobolev norms are evaluated on the normalized spectrum with weight ``dxi``;
weighted norms in physical space with weight ``dx`` and ``x`` measured from the
box center.  Both quadratures agree through the discrete Plancherel identity.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from hnls.model import EquationParams
from hnls.spectral import Field, Grid, dealias_mask, derivative_multiplier


class NormKind(enum.Enum):
    L2 = "L2"
    HsDot = "HsDot"
    Hs = "Hs"
    WeightedMu = "WeightedMu"
    WeightedMuDot = "WeightedMuDot"
    Xstheta = "Xstheta"


@dataclass(frozen=True)
class NormRequest:
    kind: NormKind
    s: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", NormKind(self.kind))
        if not (np.isfinite(self.s) and self.s >= 0):
            raise ValueError(f"Sobolev index must be >= 0, got {self.s!r}")
        if not 0 <= self.theta <= 1:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta!r}")


def _spectral_sq(u: Field, weight: np.ndarray) -> float:
    u_hat = u.grid.fft(u.values)
    return float(np.sum(weight * (u_hat.real**2 + u_hat.imag**2)) * u.grid.dxi)


def _physical_sq(u: Field, weight) -> float:
    v = u.values
    return float(np.sum(weight * (v.real**2 + v.imag**2)) * u.grid.dx)


def hs_weight(grid: Grid, s: float) -> np.ndarray:
    return (1 + grid.xi**2) ** s


def hs_dot_weight(grid: Grid, s: float) -> np.ndarray:
    return np.abs(grid.xi) ** (2 * s)


def mu_weight(grid: Grid, theta: float) -> np.ndarray:
    return (1 + grid.x**2) ** theta


def mu_dot_weight(grid: Grid, theta: float) -> np.ndarray:
    # numpy gives 0**0 == 1, so theta = 0 is the plain L2 weight
    return np.abs(grid.x) ** (2 * theta)


def l2_sq(u: Field) -> float:
    return _physical_sq(u, 1.0)


def hs_sq(u: Field, s: float) -> float:
    return _spectral_sq(u, hs_weight(u.grid, s))


def hs_dot_sq(u: Field, s: float) -> float:
    return _spectral_sq(u, hs_dot_weight(u.grid, s))


def mu_sq(u: Field, theta: float) -> float:
    return _physical_sq(u, mu_weight(u.grid, theta))


def mu_dot_sq(u: Field, theta: float) -> float:
    return _physical_sq(u, mu_dot_weight(u.grid, theta))


def norm(u: Field, req: NormRequest) -> float:
    kind = req.kind
    if kind is NormKind.L2:
        return np.sqrt(l2_sq(u))
    if kind is NormKind.HsDot:
        return np.sqrt(hs_dot_sq(u, req.s))
    if kind is NormKind.Hs:
        return np.sqrt(hs_sq(u, req.s))
    if kind is NormKind.WeightedMu:
        return np.sqrt(mu_sq(u, req.theta))
    if kind is NormKind.WeightedMuDot:
        return np.sqrt(mu_dot_sq(u, req.theta))
    return xs_theta(u, req.s, req.theta)


def xs_theta(u: Field, s: float, theta: float) -> float:
    """``||u||_{H^s} + ||u||_{L^2(dmu_theta)}``."""
    return float(np.sqrt(hs_sq(u, s)) + np.sqrt(mu_sq(u, theta)))


def sobolev_embedding_constant(grid: Grid, s: float) -> float:
    """``(sum (1 + xi^2)^(-s) dxi)^(1/2)`` over the grid frequencies.

    By Cauchy-Schwarz on the inverse transform, ``max|u| <= C_s ||u||_{H^s}``
    for every grid function (the bound holds with room to spare, a factor
    ``sqrt(2 pi)``).
    """
    return float(np.sqrt(np.sum((1 + grid.xi**2) ** (-s)) * grid.dxi))


def invariant_I1(u: Field) -> float:
    """Mass ``int |u|^2 dx``."""
    return l2_sq(u)


def invariant_I2(u: Field, params: EquationParams) -> float:
    """Energy ``C1 ||u_x||^2 + C2 ||u||_L4^4 + C3 Im int u conj(u_x) dx``.

    The quartic term is evaluated on the dealiased field.
    """
    if not params.has_energy:
        raise ValueError(
            f"second invariant needs b*e != 0, got b={params.b}, e={params.e}"
        )
    co = params.coefficients
    grid = u.grid
    u_hat = grid.fft(u.values)
    ux = grid.ifft(u_hat * derivative_multiplier(grid, 1))
    v = grid.ifft(np.where(dealias_mask(grid), u_hat, 0))
    grad = np.sum(np.abs(ux) ** 2) * grid.dx
    quartic = np.sum(np.abs(v) ** 4) * grid.dx
    twist = np.imag(np.sum(u.values * np.conj(ux))) * grid.dx
    return float(co.C1 * grad + co.C2 * quartic + co.C3 * twist)


def trapezoid_weights(times: np.ndarray) -> np.ndarray:
    if len(times) == 1:
        return np.zeros(1)
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise ValueError("mixed norm needs uniformly spaced times")
    w = np.full(len(times), abs(steps[0]))
    w[[0, -1]] *= 0.5
    return w


def mixed_norm(traj, p: float, q: float) -> float:
    """``|| ||u||_{L^q_t} ||_{L^p_x}``: time norm first, then space.

    Time integrals use the trapezoid rule over the recorded frames.
    """
    for name, r in (("p", p), ("q", q)):
        if not (r == np.inf or r >= 1):
            raise ValueError(f"{name} must be >= 1 or inf, got {r!r}")
    times = np.asarray(traj.times, dtype=float)
    mod = np.abs(np.stack([f.values for f in traj.frames]))
    grid = traj.frames[0].grid
    if q == np.inf:
        inner = mod.max(axis=0)
    else:
        w = trapezoid_weights(times)
        inner = np.sum(w[:, None] * mod**q, axis=0) ** (1 / q)
    if p == np.inf:
        return float(inner.max())
    return float(np.sum(inner**p * grid.dx) ** (1 / p))


def edge_mass(u: Field, fraction: float = 0.05) -> float:
    """Share of the mass within ``fraction * L`` of either box edge."""
    total = l2_sq(u)
    if total == 0:
        return 0.0
    near = np.abs(u.grid.x) >= (0.5 - fraction) * u.grid.length
    return _physical_sq(u, near) / total


@dataclass
class DiagnosticsRecord:
    t: float
    I1: float
    I2: float | None
    l2: float
    h1dot: float
    h2dot: float
    weighted_mu_dot: dict[float, float] = field(default_factory=dict)
    x2theta: dict[float, float] = field(default_factory=dict)
    edge_mass: float = 0.0

    def csv_header(self) -> list[str]:
        cols = ["t", "I1", "I2", "l2", "h1dot", "h2dot"]
        cols += [f"mu_dot_{th:g}" for th in self.weighted_mu_dot]
        cols += [f"x2theta_{th:g}" for th in self.x2theta]
        return cols + ["edge_mass"]

    def csv_row(self) -> list[str]:
        vals = [self.t, self.I1, self.I2, self.l2, self.h1dot, self.h2dot]
        vals += list(self.weighted_mu_dot.values()) + list(self.x2theta.values())
        vals.append(self.edge_mass)
        return ["" if v is None else repr(float(v)) for v in vals]


def diagnose(u: Field, t: float, params: EquationParams, thetas=()) -> DiagnosticsRecord:
    I1 = invariant_I1(u)
    return DiagnosticsRecord(
        t=float(t),
        I1=I1,
        I2=invariant_I2(u, params) if params.has_energy else None,
        l2=float(np.sqrt(I1)),
        h1dot=float(np.sqrt(hs_dot_sq(u, 1))),
        h2dot=float(np.sqrt(hs_dot_sq(u, 2))),
        weighted_mu_dot={th: float(np.sqrt(mu_dot_sq(u, th))) for th in thetas},
        x2theta={th: xs_theta(u, 2, th) for th in thetas},
        edge_mass=edge_mass(u),
    )
