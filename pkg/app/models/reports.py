"""Result records shared by the lab modules, the services and the CLI."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.lab.domain import Grid, MonotoneFunction
from app.lab.extended import below_cap, xsum


def _jsonable(value: float):
    """JSON has no infinity; unbounded values are emitted as the string "inf"."""
    value = float(value)
    return value if np.isfinite(value) else "inf"


def _from_jsonable(value) -> float:
    return float("inf") if value == "inf" else float(value)


@dataclass(frozen=True)
class ConditionResult:
    """A weight-condition constant, cap-relative verdict included."""

    name: str
    constant: float
    cap: float
    holds: Optional[bool] = None
    note: str = ""

    @property
    def finite(self) -> bool:
        return below_cap(self.constant, self.cap)

    @property
    def verdict(self) -> bool:
        return self.finite if self.holds is None else self.holds

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "constant": _jsonable(self.constant),
            "cap": self.cap,
            "finite": self.finite,
            "verdict": self.verdict,
            "note": self.note,
        }


@dataclass(frozen=True)
class ConstantReport:
    regime: str
    parts: Dict[str, float]
    total: float
    finite: bool
    provenance: Dict[str, object]
    warnings: Tuple[str, ...] = ()

    @classmethod
    def build(cls, regime: str, parts: Dict[str, float], provenance: dict, cap: float,
              warnings=()) -> "ConstantReport":
        parts = {name: float(value) for name, value in parts.items()}
        return cls(
            regime=regime,
            parts=parts,
            total=xsum(list(parts.values())),
            finite=all(below_cap(v, cap) for v in parts.values()),
            provenance=dict(provenance, cap=cap),
            warnings=tuple(warnings),
        )

    def rows(self) -> List[dict]:
        """CSV rows: one per part."""
        prov = self.provenance
        return [
            {
                "regime": self.regime,
                "part": name,
                "value": value,
                "finite": below_cap(value, prov["cap"]),
                "t_min": prov["t_min"],
                "t_max": prov["t_max"],
                "N": prov["N"],
                "seed": prov.get("seed", 0),
            }
            for name, value in self.parts.items()
        ]

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "parts": {k: _jsonable(v) for k, v in self.parts.items()},
            "total": _jsonable(self.total),
            "finite": self.finite,
            "provenance": self.provenance,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True, eq=False)
class OracleResult:
    best_ratio: float
    argmax: MonotoneFunction
    strategy_log: Dict[str, float]
    seed: int
    provenance: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "best_ratio": _jsonable(self.best_ratio),
            "argmax": [float(v) for v in self.argmax.values],
            "strategy_log": {k: _jsonable(v) for k, v in self.strategy_log.items()},
            "seed": self.seed,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, payload: dict, grid: Grid) -> "OracleResult":
        return cls(
            best_ratio=_from_jsonable(payload["best_ratio"]),
            argmax=MonotoneFunction(grid, np.asarray(payload["argmax"], dtype=float)),
            strategy_log={k: _from_jsonable(v) for k, v in payload["strategy_log"].items()},
            seed=int(payload["seed"]),
            provenance=dict(payload["provenance"]),
        )


@dataclass(frozen=True)
class EquivalenceReport:
    case: str
    regime: str
    rho: float
    verdict: str
    report_total: float
    oracle_best: float
    report_finite: bool
    trend: Tuple[dict, ...]
    provenance: Dict[str, object]

    @property
    def consistent(self) -> bool:
        return self.verdict.startswith("consistent")

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "regime": self.regime,
            "rho": _jsonable(self.rho),
            "verdict": self.verdict,
            "report_total": _jsonable(self.report_total),
            "oracle_best": _jsonable(self.oracle_best),
            "report_finite": self.report_finite,
            "trend": [{k: _jsonable(v) if isinstance(v, float) else v for k, v in row.items()}
                      for row in self.trend],
            "provenance": self.provenance,
        }


@dataclass(frozen=True, eq=False)
class MaximalSample:
    """Values of a maximal operator at sample points (P, n)."""

    points: np.ndarray
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class SandwichResult:
    t: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    ratio: np.ndarray
    c_low: float
    C_high: float
    tail: str
    cube_budget: int

    @property
    def window(self) -> float:
        return self.C_high / self.c_low if self.c_low > 0 else float("inf")
