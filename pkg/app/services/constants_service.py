import dataclasses
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

from tqdm import tqdm

from app.config import config
from app.lab.characterization import constant_I, constants_maximal, constants_T, constants_T_weak
from app.logger import logger
from app.models.reports import ConstantReport
from app.models.run_config import CaseConfig, GridConfig, RunConfig
from app.utils.decorators import log_execution_time, try_catch_decorator


class ConstantsService:
    """Closed-form characterization constants for every case of a run."""

    def __init__(self, run: RunConfig, threads: Optional[int] = None):
        self.run_config = run
        self.threads = threads or config.THREADS
        self.cap = run.cap if run.cap is not None else config.cap()

    def report(self, case: CaseConfig, grid_config: GridConfig) -> ConstantReport:
        grid = grid_config.build()
        v = case.v.build(grid)
        w = case.w.build(grid)
        e = case.exponents
        ack = case.acknowledge_truncation
        if case.operator == "maximal":
            report = constants_maximal(
                case.phi_weight(grid), e.alpha, case.b.build(grid), v, w, e.p, e.q,
                target=case.target, r_est=e.r, cap=self.cap,
                acknowledge_truncation=ack, seed=self.run_config.seed,
            )
        else:
            spec = case.operator_spec(grid)
            if case.target == "strong":
                report = constants_T(spec, v, w, e.p, e.q, cap=self.cap, acknowledge_truncation=ack)
            elif case.target == "weak":
                report = constants_T_weak(spec, v, w, e.p, cap=self.cap, acknowledge_truncation=ack)
            else:
                report = constant_I(spec, v, w, cap=self.cap, acknowledge_truncation=ack)
        return dataclasses.replace(
            report, provenance=dict(report.provenance, seed=self.run_config.seed)
        )

    @try_catch_decorator
    def _case(self, item: Tuple[int, CaseConfig]):
        index, case = item
        return case.label(index), self.report(case, self.run_config.grid)

    @log_execution_time
    def run(self) -> List[Tuple[str, ConstantReport]]:
        items = list(enumerate(self.run_config.cases))
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            results = list(tqdm(pool.map(self._case, items), total=len(items),
                                desc="constants", disable=not config.PROGRESS))
        done = [r for r in results if r is not None]
        if len(done) < len(items):
            logger.warning(f"{len(items) - len(done)} of {len(items)} cases failed and were skipped")
        return done
