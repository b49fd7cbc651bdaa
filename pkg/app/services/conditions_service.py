from typing import List, Optional, Tuple

from app.config import config
from app.lab.domain import cumulative
from app.lab.lorentz import (
    check_delta2,
    check_lower_r_estimate,
    check_Qr,
    check_Qr_structural,
    check_quasi_monotone,
)
from app.models.reports import ConditionResult
from app.models.run_config import CaseConfig, RunConfig
from app.utils.decorators import log_execution_time


class ConditionsService:
    """Weight and parameter conditions (Delta_2, quasi-monotonicity, Q_r, lower estimates) per case."""

    def __init__(self, run: RunConfig):
        self.run_config = run
        self.cap = run.cap if run.cap is not None else config.cap()

    def check(self, case: CaseConfig) -> List[ConditionResult]:
        grid = self.run_config.grid.build()
        ack = case.acknowledge_truncation
        e = case.exponents
        b = case.b.build(grid)
        v = case.v.build(grid)
        w = case.w.build(grid)
        results = [
            _named("B_delta2", check_delta2(cumulative(b, ack), self.cap)),
            _named("V_delta2", check_delta2(cumulative(v, ack), self.cap)),
            _named("W_delta2", check_delta2(cumulative(w, ack), self.cap)),
        ]
        if case.operator == "maximal":
            phi = case.phi_weight(grid)
            r = e.r if e.r is not None else e.alpha
            results += [
                _named("phi_quasi_increasing", check_quasi_monotone(phi, "increasing", self.cap)),
                check_Qr(phi, r, seed=self.run_config.seed, cap=self.cap),
                check_Qr_structural(phi, r, self.cap),
                _named("b_lower_r_estimate", check_lower_r_estimate(e.alpha, b, r, self.cap)),
            ]
        elif e.r is not None:
            results.append(_named("v_lower_r_estimate", check_lower_r_estimate(e.p, v, e.r, self.cap)))
        return results

    @log_execution_time
    def run(self) -> List[Tuple[str, List[ConditionResult]]]:
        return [(case.label(i), self.check(case)) for i, case in enumerate(self.run_config.cases)]


def _named(name: str, result: ConditionResult) -> ConditionResult:
    return ConditionResult(name, result.constant, result.cap, result.holds, result.note)
