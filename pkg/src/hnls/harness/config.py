"""Experiment configuration: scenarios, defaults and JSON round-tripping."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from hnls import solutions
from hnls.integrator import SolverConfig
from hnls.model import EquationParams
from hnls.spectral import Field, Grid

SCENARIOS = ("free", "plane_wave", "mkdv_soliton", "nls", "general")
PROFILES = ("gaussian", "sech", "soliton", "plane_wave", "zero")


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass(frozen=True)
class GridSpec:
    n: int = 1024
    L: float = 80.0

    def build(self) -> Grid:
        return Grid(int(self.n), float(self.L))


@dataclass(frozen=True)
class InitialData:
    """Initial profile; which fields matter depends on ``profile``.

    gaussian: amplitude, width, center, carrier.  sech: amplitude sech(k(x - center)).
    soliton: exact sech soliton of the mKdV-type flow with wavenumber k.
    plane_wave: amplitude exp(i mode (2 pi / L) x).
    """

    profile: str = "gaussian"
    amplitude: float = 1.0
    width: float = 1.0
    center: float = 0.0
    carrier: float = 0.0
    k: float = 1.0
    mode: int = 1

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ConfigError(f"unknown profile {self.profile!r}; expected one of {PROFILES}")
        if self.width <= 0:
            raise ConfigError(f"width must be positive, got {self.width}")

    def build(self, grid: Grid, params: EquationParams) -> Field:
        if self.profile == "gaussian":
            return solutions.gaussian(grid, self.amplitude, self.width, self.center, self.carrier)
        if self.profile == "sech":
            return Field(grid, self.amplitude / np.cosh(self.k * (grid.x - self.center)) + 0j)
        if self.profile == "soliton":
            return solutions.mkdv_soliton(grid, self.k, params, center=self.center)
        if self.profile == "plane_wave":
            return solutions.plane_wave(grid, self.amplitude, int(self.mode), params)
        return Field.zeros(grid)


@dataclass(frozen=True)
class LemmaFamilySpec:
    A: float = 1.0
    R0: float = 1.0
    T: float = 1.0
    n_times: int = 21


_SCENARIO_PARAMS = {
    "free": EquationParams(a=1.0, b=1.0),
    "plane_wave": EquationParams(a=1.0, b=1.0, c=1.0, d=1.0, e=0.5),
    "mkdv_soliton": EquationParams(a=0.0, b=1.0, c=0.0, d=1.0, e=0.0),
    "nls": EquationParams(a=-1.0, b=0.0, c=-1.0),
    "general": EquationParams(a=1.0, b=1.0, c=1.0, d=1.0, e=1.0),
}

_SCENARIO_DATA = {
    "free": InitialData("gaussian"),
    "plane_wave": InitialData("plane_wave", amplitude=0.5, mode=3),
    "mkdv_soliton": InitialData("soliton", k=1.0),
    "nls": InitialData("gaussian"),
    "general": InitialData("gaussian"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "mkdv_soliton"
    params: EquationParams = field(default_factory=lambda: _SCENARIO_PARAMS["mkdv_soliton"])
    grid: GridSpec = field(default_factory=GridSpec)
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(dt=1e-3, t_end=1.0, record_every=10))
    thetas: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    lambda_ladder: tuple[float, ...] = (4.0, 8.0, 16.0, 32.0)
    perturbation_eps: tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    seed: int = 0
    initial_data: InitialData = field(default_factory=lambda: _SCENARIO_DATA["mkdv_soliton"])
    lemma_family: LemmaFamilySpec = field(default_factory=LemmaFamilySpec)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        thetas = tuple(float(t) for t in self.thetas)
        if any(not 0 <= t <= 1 for t in thetas):
            raise ConfigError(f"thetas must lie in [0, 1], got {thetas}")
        ladder = tuple(float(v) for v in self.lambda_ladder)
        if any(v <= 0 for v in ladder) or any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ConfigError(f"lambda_ladder must be positive and strictly increasing, got {ladder}")
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "lambda_ladder", ladder)
        object.__setattr__(self, "perturbation_eps", tuple(float(v) for v in self.perturbation_eps))
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def for_scenario(cls, scenario: str, **overrides) -> "ExperimentConfig":
        if scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")
        base = dict(scenario=scenario, params=_SCENARIO_PARAMS[scenario],
                    initial_data=_SCENARIO_DATA[scenario])
        base.update(overrides)
        return cls(**base)

    def build_grid(self) -> Grid:
        return self.grid.build()

    def initial_field(self, grid: Grid | None = None) -> Field:
        return self.initial_data.build(grid or self.build_grid(), self.params)

    def solver_for(self, t_end: float) -> SolverConfig:
        return replace(self.solver, t_end=t_end, thetas=self.thetas)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["solver"].pop("thetas", None)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        scenario = data.get("scenario", "mkdv_soliton")
        default = cls.for_scenario(scenario)
        try:
            params = EquationParams(**{**default.params.as_dict(), **data.pop("params", {})})
            grid = GridSpec(**{**asdict(default.grid), **data.pop("grid", {})})
            solver_kw = {**asdict(default.solver), **data.pop("solver", {})}
            solver_kw.pop("thetas", None)
            solver = SolverConfig(**solver_kw)
            initial = InitialData(**{**asdict(default.initial_data), **data.pop("initial_data", {})})
            family = LemmaFamilySpec(**{**asdict(default.lemma_family), **data.pop("lemma_family", {})})
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        data.pop("scenario", None)
        return cls(scenario=scenario, params=params, grid=grid, solver=solver,
                   initial_data=initial, lemma_family=family, **data)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_dict(data)
