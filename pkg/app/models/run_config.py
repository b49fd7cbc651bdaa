"""Run configuration documents (the ``--config`` JSON), validated with pydantic."""

import hashlib
import math
from typing import List, Literal, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.lab.domain import Grid, PowerLog, WeightSpec, make_log_grid
from app.lab.hardy_suprema import SupOpSpec
from app.lab.rearrangement import RadialField, StepField


class LabModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    def cache_key(self) -> str:
        return hashlib.sha256(self.model_dump_json().encode("utf-8")).hexdigest()[:16]


class GridConfig(LabModel):
    t_min: float = Field(gt=0)
    t_max: float = Field(gt=0)
    N: int = Field(ge=2)

    @model_validator(mode="after")
    def _ordered(self):
        if not self.t_min < self.t_max:
            raise ValueError(f"need t_min < t_max, got ({self.t_min}, {self.t_max})")
        return self

    def build(self) -> Grid:
        return make_log_grid(self.t_min, self.t_max, self.N)

    def refined(self, factor: int) -> "GridConfig":
        return self.model_copy(update={"N": self.N * factor})


class PowerLogConfig(LabModel):
    """w(t) = scale * t^a * (1 + |log t|)^{A0 below 1, Ainf above 1}."""

    a: float = 0.0
    A0: float = 0.0
    Ainf: float = 0.0
    scale: float = Field(default=1.0, gt=0)

    def build(self) -> PowerLog:
        return PowerLog(self.a, self.A0, self.Ainf, self.scale)


class WeightConfig(LabModel):
    """Either a power-log descriptor or a two-column (t, value) CSV of samples."""

    power: Optional[PowerLogConfig] = None
    samples: Optional[str] = None

    @model_validator(mode="after")
    def _one_source(self):
        if self.power is not None and self.samples is not None:
            raise ValueError("give either 'power' or 'samples', not both")
        return self

    def build(self, grid: Grid) -> WeightSpec:
        if self.samples is None:
            return WeightSpec.from_descriptor(grid, (self.power or PowerLogConfig()).build())
        frame = pd.read_csv(self.samples, header=None, names=["t", "value"], comment="#")
        frame = frame.apply(pd.to_numeric, errors="coerce").dropna().sort_values("t")
        if frame.empty:
            raise ValueError(f"no numeric (t, value) rows in {self.samples}")
        values = np.interp(grid.mids, frame["t"].to_numpy(), frame["value"].to_numpy())
        return WeightSpec.from_samples(grid, values)


class ExponentsConfig(LabModel):
    p: float = Field(gt=0)
    q: float = Field(gt=0)
    alpha: float = Field(default=1.0, gt=0)
    r: Optional[float] = Field(default=None, gt=0)


class CaseConfig(LabModel):
    """One (operator, weights, exponents) point of a sweep.

    operator "T" uses u and b (u omitted means u = B, i.e. u/B = 1);
    operator "maximal" uses phi, alpha and b.
    """

    name: str = ""
    operator: Literal["T", "maximal"] = "T"
    u: Optional[WeightConfig] = None
    b: WeightConfig = WeightConfig()
    v: WeightConfig = WeightConfig()
    w: WeightConfig = WeightConfig()
    phi: Optional[PowerLogConfig] = None
    exponents: ExponentsConfig
    target: Literal["strong", "weak", "weak-weak"] = "strong"
    acknowledge_truncation: bool = False

    @model_validator(mode="after")
    def _operator_data(self):
        if self.operator == "maximal" and self.phi is None:
            raise ValueError("maximal cases need 'phi'")
        if self.target == "strong" and math.isinf(self.exponents.q):
            raise ValueError("strong target needs a finite q; use target 'weak'")
        return self

    def label(self, index: int) -> str:
        return self.name or f"case{index}"

    def operator_spec(self, grid: Grid) -> SupOpSpec:
        b = self.b.build(grid)
        if self.u is None:
            return SupOpSpec.from_kernel(np.ones(grid.N), b, self.acknowledge_truncation)
        return SupOpSpec.build(self.u.build(grid), b, self.acknowledge_truncation)

    def phi_weight(self, grid: Grid) -> WeightSpec:
        return WeightSpec.from_descriptor(grid, self.phi.build())


class PresetConfig(LabModel):
    """A named maximal operator: classical, fractional, power_log or lorentz."""

    name: Literal["classical", "fractional", "power_log", "lorentz"] = "classical"
    gamma: float = 0.0
    s: float = 1.0
    A: Tuple[float, float] = (0.0, 0.0)
    p: float = 2.0
    q: float = 1.0


class FieldConfig(LabModel):
    """A test field: radial (radii + non-increasing values) or 1-d intervals."""

    name: str = ""
    kind: Literal["radial", "intervals"] = "radial"
    n: Literal[1, 2] = 1
    radii: List[float] = []
    values: List[float] = []
    intervals: List[Tuple[float, float, float]] = []

    @model_validator(mode="after")
    def _shape(self):
        if self.kind == "radial" and len(self.radii) != len(self.values) + 1:
            raise ValueError("radial fields need len(radii) == len(values) + 1")
        if self.kind == "intervals" and self.n != 1:
            raise ValueError("interval fields are one-dimensional")
        return self

    def label(self, index: int) -> str:
        return self.name or f"field{index}"

    def build(self):
        if self.kind == "intervals":
            return StepField.from_intervals(self.intervals)
        return RadialField.from_steps(self.n, self.radii, self.values)


class RunConfig(LabModel):
    grid: GridConfig
    cases: List[CaseConfig] = []
    fields: List[FieldConfig] = []
    operators: List[PresetConfig] = [PresetConfig()]
    points: Optional[List[List[float]]] = None
    refinements: int = Field(default=2, ge=0)
    budget: int = Field(default=256, ge=1)
    cube_budget: int = Field(default=8, ge=1)
    samples: int = Field(default=512, ge=4)
    seed: int = Field(default=0, ge=0)
    cap: Optional[float] = Field(default=None, gt=0)

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as f:
            return cls.model_validate_json(f.read())
