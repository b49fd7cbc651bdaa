#!/usr/bin/env python3
"""Sandwich windows of three operators on indicator balls, budget 8 vs 16."""
import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.lab.maximal_sandbox import OperatorPreset, sandwich_check
from app.lab.rearrangement import RadialField
from app.logger import logger


def main():
    presets = [
        OperatorPreset.classical(),
        OperatorPreset.lorentz(2.0, 1.0),
        OperatorPreset.power_log(1.0, 0.5, (1.0, -1.0)),
    ]
    field = RadialField.from_steps(1, [0.25, 0.5], [1.0])
    for preset in presets:
        for budget in (8, 16):
            result = sandwich_check(field, preset.phi, preset.alpha, preset.b, cube_budget=budget, samples=256)
            logger.info(f"{preset.name} budget={budget}: [{result.c_low:.4g}, {result.C_high:.4g}]")
    logger.info("Done.")


if __name__ == "__main__":
    main()
