from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

from tqdm import tqdm

from app.config import config
from app.lab.domain import WeightSpec, cumulative
from app.lab.extended import xpow
from app.lab.hardy_suprema import reduce_maximal_to_T
from app.lab.oracle import oracle_T_norm, oracle_weak_norms
from app.logger import logger
from app.models.reports import OracleResult
from app.models.run_config import CaseConfig, GridConfig, RunConfig
from app.utils.caching_util import CachingUtil
from app.utils.decorators import cached_data, log_execution_time, try_catch_decorator


class OracleService:
    """Brute-force cone estimates for the cases of a run.

    Maximal cases are estimated on the reduced supremum operator with
    exponents p/alpha, q/alpha, so their ratios measure C^alpha.
    """

    def __init__(self, run: RunConfig, threads: Optional[int] = None):
        self.run_config = run
        self.threads = threads or config.THREADS
        if config.CACHE_ENABLED:
            removed = CachingUtil().purge()
            if removed:
                logger.info(f"Purged {removed} expired cache entries")

    @cached_data(cache_key_prefix="oracle")
    def _payload(self, case: CaseConfig, grid_config: GridConfig, budget: int, seed: int) -> dict:
        grid = grid_config.build()
        e = case.exponents
        ack = case.acknowledge_truncation
        v = case.v.build(grid)
        w = case.w.build(grid)
        p, q = e.p, e.q
        if case.operator == "maximal":
            spec = reduce_maximal_to_T(case.phi_weight(grid), e.alpha, case.b.build(grid), ack)
            p, q = e.p / e.alpha, e.q / e.alpha
            if case.target != "strong":
                w = WeightSpec.from_samples(grid, xpow(cumulative(w, ack).at_mids, e.alpha / e.q))
            if case.target == "weak-weak":
                v = WeightSpec.from_samples(grid, xpow(cumulative(v, ack).at_mids, e.alpha / e.p))
        else:
            spec = case.operator_spec(grid)
        # the oracle runs single-threaded inside a case; cases run in parallel
        if case.target == "strong":
            result = oracle_T_norm(spec, v, w, p, q, budget, seed, threads=1)
        else:
            result = oracle_weak_norms(spec, v, w, p, case.target, budget, seed, threads=1)
        return result.to_dict()

    def estimate(self, case: CaseConfig, grid_config: GridConfig) -> OracleResult:
        payload = self._payload(case, grid_config, self.run_config.budget, self.run_config.seed)
        return OracleResult.from_dict(payload, grid_config.build())

    @try_catch_decorator
    def _case(self, item: Tuple[int, CaseConfig]):
        index, case = item
        return case.label(index), self.estimate(case, self.run_config.grid)

    @log_execution_time
    def run(self) -> List[Tuple[str, OracleResult]]:
        items = list(enumerate(self.run_config.cases))
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            results = list(tqdm(pool.map(self._case, items), total=len(items),
                                desc="oracle", disable=not config.PROGRESS))
        done = [r for r in results if r is not None]
        if len(done) < len(items):
            logger.warning(f"{len(items) - len(done)} of {len(items)} oracle cases failed and were skipped")
        return done
