from typing import List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from app.config import config
from app.lab.maximal_sandbox import OperatorPreset, eval_maximal, herz_stein_check, sandwich_check
from app.lab.rearrangement import RadialField
from app.logger import logger
from app.models.reports import MaximalSample, SandwichResult
from app.models.run_config import PresetConfig, RunConfig
from app.utils.decorators import log_execution_time


def build_preset(preset: PresetConfig, n: int) -> OperatorPreset:
    if preset.name == "classical":
        return OperatorPreset.classical()
    if preset.name == "fractional":
        return OperatorPreset.fractional(preset.gamma, n)
    if preset.name == "power_log":
        return OperatorPreset.power_log(preset.s, preset.gamma, preset.A, n)
    return OperatorPreset.lorentz(preset.p, preset.q)


class SandboxService:
    """Direct maximal-operator experiments on the fields of a run."""

    def __init__(self, run: RunConfig, threads: Optional[int] = None):
        self.run_config = run
        self.threads = threads or config.THREADS

    def _pairs(self):
        for i, field in enumerate(self.run_config.fields):
            f = field.build()
            for preset in self.run_config.operators:
                yield field.label(i), f, build_preset(preset, f.n)

    @log_execution_time
    def sandwich(self) -> List[Tuple[str, str, SandwichResult]]:
        run = self.run_config
        results = []
        pairs = list(self._pairs())
        for name, f, preset in tqdm(pairs, desc="sandwich", disable=not config.PROGRESS):
            if isinstance(f, RadialField):
                result = sandwich_check(f, preset.phi, preset.alpha, preset.b, run.cube_budget,
                                        run.samples, threads=self.threads)
            elif preset.is_classical:
                result = herz_stein_check(f, run.cube_budget, run.samples, threads=self.threads)
            else:
                logger.warning(f"Skipping {name} with {preset.name}: non-radial fields use the classical operator only")
                continue
            results.append((name, preset.name, result))
        return results

    @log_execution_time
    def maximal(self) -> List[Tuple[str, str, MaximalSample]]:
        run = self.run_config
        points = None if run.points is None else np.asarray(run.points, dtype=float)
        results = []
        for name, f, preset in tqdm(list(self._pairs()), desc="maximal", disable=not config.PROGRESS):
            sample = eval_maximal(f, preset.phi, preset.alpha, preset.b, run.cube_budget,
                                  points, threads=self.threads)
            results.append((name, preset.name, sample))
        return results
