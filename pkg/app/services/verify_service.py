from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

from tqdm import tqdm

from app.config import config
from app.lab.oracle import verify_equivalence
from app.models.reports import EquivalenceReport
from app.models.run_config import CaseConfig, RunConfig
from app.services.constants_service import ConstantsService
from app.services.oracle_service import OracleService
from app.utils.decorators import log_execution_time, try_catch_decorator


class VerifyService:
    """Formula totals against oracle lower bounds, with an N -> 2N -> 4N trend."""

    def __init__(self, run: RunConfig, threads: Optional[int] = None):
        self.run_config = run
        self.threads = threads or config.THREADS
        self.constants = ConstantsService(run, threads)
        self.oracle = OracleService(run, threads)

    def verify(self, case: CaseConfig, name: str) -> EquivalenceReport:
        grids = [self.run_config.grid.refined(2 ** k) for k in range(self.run_config.refinements + 1)]
        chain = [(self.constants.report(case, g), self.oracle.estimate(case, g)) for g in grids]
        alpha = case.exponents.alpha if case.operator == "maximal" else 1.0
        return verify_equivalence(chain[0][0], chain[0][1], chain[1:], case=name, alpha=alpha)

    @try_catch_decorator
    def _case(self, item: Tuple[int, CaseConfig]):
        index, case = item
        return self.verify(case, case.label(index))

    @log_execution_time
    def run(self) -> List[Optional[EquivalenceReport]]:
        """One entry per case; None marks a case that raised."""
        items = list(enumerate(self.run_config.cases))
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(tqdm(pool.map(self._case, items), total=len(items),
                             desc="verify", disable=not config.PROGRESS))
