#!/usr/bin/env python3
"""Oracle best ratio of the Hardy average on L^2 as the domain widens by decades."""
import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.lab.domain import WeightSpec, make_log_grid
from app.lab.hardy_suprema import hardy_average_spec
from app.lab.oracle import oracle_T_norm
from app.logger import logger

CELLS_PER_DECADE = 128


def main():
    for decades in range(1, 5):
        grid = make_log_grid(10.0 ** -decades, 10.0 ** decades, 2 * decades * CELLS_PER_DECADE)
        one = WeightSpec.power(grid, 0.0)
        result = oracle_T_norm(hardy_average_spec(grid), one, one, 2.0, 2.0, budget=64, seed=0)
        logger.info(f"(1e-{decades}, 1e{decades}): best ratio {result.best_ratio:.6f}")
    logger.info("Done.")


if __name__ == "__main__":
    main()
