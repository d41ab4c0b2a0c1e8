"""Abstract interpolation lemma: hypotheses, constants and inequality checks.

A family member is a set of frames ``f(t, .)`` on one grid with a designated
initial frame ``f(0, .)``.  The lemma is applied in physical space: the
weights ``|x|^(2 theta)`` use the grid coordinate.

Hypotheses checked by `check_conditions`:

(i)   each frame is nonzero on a set of positive measure;
(ii)  ``||f(t)||^2 <= C0 ||f(0)||^2`` and
      ``||f(t)||^2_{mu_dot} <= C0t ||f(0)||^2_{mu_dot} + C1t``;
(iii) ``int_{|f(t)|^2 < Theta} |f(t)|^2 dmu_dot_theta <= gamma1 int |f(t)|^2 dmu_dot_theta``
      for every tested theta, with one Theta shared by all theta;
(iv)  ``int_{|x| >= R} |f(0)|^2 dmu_dot <= gamma2 int |f(0)|^2 dmu_dot``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from hnls import norms
from hnls.spectral import Field, Grid


class LemmaError(ValueError):
    """Lemma machinery cannot proceed (bad witness, unchecked member, ...)."""


@dataclass(frozen=True)
class LemmaWitness:
    C0: float
    C0t: float
    C1t: float
    Theta: float
    gamma1: float
    R: float
    gamma2: float
    s: float = 1.0
    T: float = 1.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            object.__setattr__(self, name, float(value))
        problems = []
        if not self.C0 > 0:
            problems.append("C0 > 0")
        if not self.C0t > 0:
            problems.append("C0t > 0")
        if not self.C1t >= 0:
            problems.append("C1t >= 0")
        if not self.Theta > 0:
            problems.append("Theta > 0")
        if not 0 < self.gamma1 < 1:
            problems.append("0 < gamma1 < 1")
        if not self.R > 0:
            problems.append("R > 0")
        if not 0 < self.gamma2 < 1:
            problems.append("0 < gamma2 < 1")
        if not self.s > 0.5:
            problems.append("s > 1/2")
        if not self.T >= 0:
            problems.append("T >= 0")
        if problems:
            raise LemmaError("witness violates: " + ", ".join(problems))


@dataclass(frozen=True)
class LemmaConstants:
    theta: float
    rho: float
    K0: float
    K1: float
    K2: float


def lemma_constants(witness: LemmaWitness, theta: float) -> LemmaConstants:
    """``rho = (1 - theta)/theta`` and the three K constants of the inequality."""
    if not 0 < theta < 1:
        raise LemmaError(f"lemma constants need theta in (0, 1), got {theta!r}")
    w = witness
    rho = (1 - theta) / theta
    ratio = 4 / w.Theta
    return LemmaConstants(
        theta=theta,
        rho=rho,
        K0=w.C0 * w.R ** (2 * theta) * ratio ** (rho + 1),
        K1=w.C0t / (rho * (1 - w.gamma2)) * ratio**rho,
        K2=w.C1t / (rho * w.R ** (2 * theta * rho)),
    )


@dataclass
class FamilyMember:
    """Frames ``f(t, .)`` on one grid; ``initial`` is ``f(0, .)``."""

    grid: Grid
    times: np.ndarray
    frames: np.ndarray
    initial: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.frames = np.atleast_2d(np.asarray(self.frames, dtype=complex))
        self.initial = np.asarray(self.initial, dtype=complex)
        if self.frames.size and self.frames.shape != (len(self.times), self.grid.n):
            raise LemmaError(
                f"frames shape {self.frames.shape} does not match "
                f"{len(self.times)} times on n={self.grid.n}"
            )

    @classmethod
    def from_trajectories(cls, *trajectories) -> "FamilyMember":
        """Merge runs that all start at ``t = 0`` into one member on ``[-T, T]``."""
        times, frames = [], []
        for traj in trajectories:
            if traj.times[0] != 0:
                raise LemmaError("trajectories must start at t = 0")
            for t, f in zip(traj.times, traj.frames):
                if t == 0 and times and 0.0 in times:
                    continue
                times.append(float(t))
                frames.append(f.values)
        order = np.argsort(times)
        grid = trajectories[0].frames[0].grid
        return cls(
            grid,
            np.asarray(times)[order],
            np.stack(frames)[order],
            trajectories[0].frames[0].values,
        )

    def frame(self, i: int) -> Field:
        return Field(self.grid, self.frames[i])

    @property
    def f0(self) -> Field:
        return Field(self.grid, self.initial)

    def __len__(self) -> int:
        return len(self.times)


@dataclass
class Check:
    condition: str
    t: float | None
    theta: float | None
    lhs: float
    rhs: float
    slack: float
    passed: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


@dataclass
class ConditionReport:
    checks: list[Check] = field(default_factory=list)
    witness: LemmaWitness | None = None

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def min_slack(self, condition: str) -> float:
        return min(c.slack for c in self.checks if c.condition == condition)

    def to_json(self) -> str:
        return json.dumps([c.to_dict() for c in self.checks], indent=1)


def weighted_sq(values: np.ndarray, grid: Grid, theta: float, mask=None) -> float:
    w = norms.mu_dot_weight(grid, theta) * (values.real**2 + values.imag**2)
    if mask is not None:
        w = w * mask
    return float(np.sum(w) * grid.dx)


def check_conditions(
    member: FamilyMember, witness: LemmaWitness, thetas
) -> ConditionReport:
    if len(member) == 0:
        raise LemmaError("family member has no frames")
    thetas = [float(th) for th in thetas]
    if any(not 0 <= th <= 1 for th in thetas):
        raise LemmaError(f"thetas must lie in [0, 1], got {thetas}")
    w = witness
    grid = member.grid
    f0 = member.initial
    l2_0 = weighted_sq(f0, grid, 0.0)
    mu_0 = weighted_sq(f0, grid, 1.0)
    report = ConditionReport(witness=witness)
    add = report.checks.append

    for t, f in zip(member.times, member.frames):
        t = float(t)
        measure = float(np.count_nonzero(f) * grid.dx)
        add(Check("i", t, None, measure, 0.0, measure, measure > 0))

        lhs, rhs = weighted_sq(f, grid, 0.0), w.C0 * l2_0
        add(Check("ii.AIL0", t, 0.0, lhs, rhs, rhs - lhs, lhs <= rhs))
        lhs, rhs = weighted_sq(f, grid, 1.0), w.C0t * mu_0 + w.C1t
        add(Check("ii.AIL1", t, 1.0, lhs, rhs, rhs - lhs, lhs <= rhs))

        low = (f.real**2 + f.imag**2) < w.Theta
        for th in thetas:
            lhs = weighted_sq(f, grid, th, low)
            rhs = w.gamma1 * weighted_sq(f, grid, th)
            add(Check("iii", t, th, lhs, rhs, rhs - lhs, lhs <= rhs))

    outside = np.abs(grid.x) >= w.R
    lhs, rhs = weighted_sq(f0, grid, 1.0, outside), w.gamma2 * mu_0
    add(Check("iv", 0.0, 1.0, lhs, rhs, rhs - lhs, lhs <= rhs))
    return report


@dataclass
class InequalityCheck:
    t: float
    theta: float
    lhs: float
    rhs_literal: float
    rhs_corrected: float

    @property
    def slack_literal(self) -> float:
        return self.rhs_literal - self.lhs

    @property
    def slack_corrected(self) -> float:
        return self.rhs_corrected - self.lhs

    @property
    def passed(self) -> bool:
        return self.slack_corrected >= 0

    def to_dicts(self) -> list[dict]:
        return [
            dict(condition="AIL.A", t=self.t, theta=self.theta, lhs=self.lhs,
                 rhs=self.rhs_literal, slack=self.slack_literal,
                 **{"pass": self.slack_literal >= 0}),
            dict(condition="AIL.B", t=self.t, theta=self.theta, lhs=self.lhs,
                 rhs=self.rhs_corrected, slack=self.slack_corrected,
                 **{"pass": self.passed}),
        ]


def verify_inequality(
    member: FamilyMember, witness: LemmaWitness, theta: float, report: ConditionReport
) -> list[InequalityCheck]:
    """Evaluate both sides of the interpolation inequality at every frame.

    Variant A uses the constants literally.  Variant B multiplies the
    ``||f(t)||_{H^s}^{2 rho}`` factor by ``C_s^{2 rho}``, the grid Sobolev
    embedding constant, which is the form the argument actually supports.
    Only B is expected to be nonnegative.
    """
    if report is None or report.witness is not witness:
        raise LemmaError("member has not been checked against this witness")
    if not report.passed:
        bad = sorted({c.condition for c in report.failures()})
        raise LemmaError(f"hypotheses fail for this member: {bad}")
    if not any(c.condition == "iii" and c.theta == theta for c in report.checks):
        raise LemmaError(f"condition (iii) was not checked at theta={theta}")
    k = lemma_constants(witness, theta)
    grid = member.grid
    f0 = member.initial
    base = k.K0 * weighted_sq(f0, grid, 0.0) + k.K1 * weighted_sq(f0, grid, theta) + k.K2
    cs = norms.sobolev_embedding_constant(grid, witness.s)
    out = []
    for t, f in zip(member.times, member.frames):
        hs = np.sqrt(norms.hs_sq(Field(grid, f), witness.s))
        lit = hs ** (2 * k.rho) * base
        out.append(InequalityCheck(
            t=float(t), theta=theta, lhs=weighted_sq(f, grid, theta),
            rhs_literal=lit, rhs_corrected=cs ** (2 * k.rho) * lit,
        ))
    return out


def level_set_split(f: Field, theta: float, threshold: float) -> tuple[float, float, float]:
    """The three pieces ``(I1, I2, I3)`` of the level-set decomposition.

    ``I1`` integrates ``|x|^(2 theta)|f|^2`` over ``{|f|^2 > threshold}``,
    ``I2`` is ``threshold`` times the ``|x|^(2 theta)`` measure of that set and
    ``I3`` is the complementary integral.  ``I2 < I1`` whenever the set has
    positive weighted measure.
    """
    mod2 = np.abs(f.values) ** 2
    weight = norms.mu_dot_weight(f.grid, theta)
    high = mod2 > threshold
    dx = f.grid.dx
    I1 = float(np.sum(weight * mod2 * high) * dx)
    I2 = float(threshold * np.sum(weight * high) * dx)
    I3 = float(np.sum(weight * mod2 * ~high) * dx)
    return I1, I2, I3


# Example family: plateau profiles scaled by (1 + |t|)


def plateau_ratio(b: float, R0: float, theta) -> np.ndarray:
    """``int_{R0<=|x|<=R0+b} |x|^(2 theta) / int_{|x|<=R0} |x|^(2 theta)``."""
    p = 2 * np.asarray(theta, dtype=float) + 1
    return ((R0 + b) ** p - R0**p) / R0**p


def taper_width(R0: float, T: float, n_theta: int = 101, rtol: float = 1e-14) -> float:
    """Largest taper width ``b`` keeping the ring-to-core ratio below ``1/(2(T+1)^2)``.

    The ratio is checked on ``n_theta`` equispaced theta in [0, 1]; ``b`` is
    found by bisection.
    """
    thetas = np.linspace(0.0, 1.0, n_theta)
    bound = 1 / (2 * (T + 1) ** 2)

    def ok(b):
        return np.max(plateau_ratio(b, R0, thetas)) <= bound

    lo, hi = 0.0, R0
    for _ in range(200):
        if not ok(hi):
            break
        lo, hi = hi, 2 * hi
    else:
        raise LemmaError("bisection failed to bracket the taper width")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    if lo == 0:
        raise LemmaError("no positive taper width satisfies the ring condition")
    return lo


def plateau_profile(x: np.ndarray, A: float, R0: float, b: float) -> np.ndarray:
    r = np.abs(x)
    taper = A * np.clip(1 - (r - R0) / b, 0.0, 1.0)
    return np.where(r <= R0, A, taper)


def default_family_grid(R0: float, b: float) -> Grid:
    length = 4 * (R0 + b)
    n = 256
    while length / n > b / 16:
        n *= 2
    return Grid(n, length)


def build_example_family(
    A: float,
    R0: float,
    T: float,
    n_times: int,
    grid: Grid | None = None,
    gamma2: float = 0.5,
    s: float = 1.0,
) -> tuple[FamilyMember, LemmaWitness]:
    """Plateau family ``f(t, x) = f(x)(1 + |t|)`` and a witness for it.

    ``f`` equals ``A`` on ``|x| <= R0`` and tapers linearly to zero over
    ``[R0, R0 + b]`` with ``b`` from `taper_width`.  The witness uses
    ``C0 = C0t = (1 + T)^2``, since that is what the squared norms scale by.
    """
    if not (A > 0 and R0 > 0 and T >= 0):
        raise LemmaError(f"need A > 0, R0 > 0, T >= 0; got A={A}, R0={R0}, T={T}")
    if n_times < 1:
        raise LemmaError(f"n_times must be positive, got {n_times}")
    b = taper_width(R0, T)
    grid = grid or default_family_grid(R0, b)
    profile = plateau_profile(grid.x, A, R0, b).astype(complex)
    times = np.linspace(-T, T, n_times)
    frames = np.outer(1 + np.abs(times), profile)
    member = FamilyMember(grid, times, frames, profile)
    witness = LemmaWitness(
        C0=(1 + T) ** 2, C0t=(1 + T) ** 2, C1t=0.0, Theta=A**2, gamma1=0.5,
        R=R0 + b, gamma2=gamma2, s=s, T=T,
    )
    return member, witness


def estimate_witness(
    frames, thetas, s: float = 1.0, headroom: float = 1.1, n_levels: int = 512
) -> LemmaWitness:
    """Empirical hypothesis constants for a set of frames.

    ``frames`` is a `FamilyMember` or a trajectory starting at ``t = 0``.
    ``C0`` and ``C0t`` are the largest observed norm ratios times ``headroom``
    (``C1t = 0``); ``Theta`` is the largest ``|f|^2`` quantile for which (iii)
    holds with ``gamma1 = 1/2``; ``R`` is the smallest grid radius for which
    (iv) holds with ``gamma2 = 1/2``.
    """
    member = frames if isinstance(frames, FamilyMember) else FamilyMember.from_trajectories(frames)
    grid = member.grid
    if len(member) == 0 or not np.any(member.initial):
        raise LemmaError("cannot estimate a witness from zero data")
    f0 = member.initial
    l2_0 = weighted_sq(f0, grid, 0.0)
    mu_0 = weighted_sq(f0, grid, 1.0)
    l2 = np.array([weighted_sq(f, grid, 0.0) for f in member.frames])
    mu = np.array([weighted_sq(f, grid, 1.0) for f in member.frames])
    C0 = headroom * float(np.max(l2) / l2_0)
    C0t = headroom * float(np.max(mu) / mu_0)

    mod2 = member.frames.real**2 + member.frames.imag**2
    positive = mod2[mod2 > 0]
    levels = np.unique(np.quantile(positive, np.linspace(0, 1, n_levels)))
    weights = {th: norms.mu_dot_weight(grid, th) for th in thetas}
    totals = {th: np.sum(weights[th] * mod2, axis=1) for th in thetas}

    def admissible(level):
        low = mod2 < level
        return all(
            np.all(np.sum(weights[th] * mod2 * low, axis=1) <= 0.5 * totals[th])
            for th in thetas
        )

    # the low-level integral grows with the level, so admissible levels form a prefix
    if not admissible(levels[0]):
        raise LemmaError("condition (iii): no admissible Theta among |f|^2 quantiles")
    lo, hi = 0, len(levels)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if admissible(levels[mid]):
            lo = mid
        else:
            hi = mid
    Theta = float(levels[lo])

    radii = np.unique(np.abs(grid.x))
    weighted = norms.mu_dot_weight(grid, 1.0) * np.abs(f0) ** 2
    r = np.abs(grid.x)
    tail = np.array([np.sum(weighted[r >= R]) for R in radii]) * grid.dx
    ok = radii[(tail <= 0.5 * mu_0) & (radii > 0)]
    if ok.size == 0:
        raise LemmaError("condition (iv): no admissible radius R on the grid")
    R = float(ok.min())

    T = float(np.max(np.abs(member.times)))
    return LemmaWitness(C0=C0, C0t=C0t, C1t=0.0, Theta=Theta, gamma1=0.5,
                        R=R, gamma2=0.5, s=s, T=T)
