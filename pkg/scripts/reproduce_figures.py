#!/usr/bin/env python3
"""Run every figure-reproduction experiment into results/.

Order: signal CDF validation, outage sweep, transform validation, the six
epidemic panels, then the four propagation-intensity sweeps.  Figures 3 and
4 use the default configuration; the rest load their dedicated files.

Full-size runs (1e5 trials) take a few minutes each for the Monte Carlo
commands; pass --quick for a 2e4-trial smoke pass.
"""

import argparse
import sys
from pathlib import Path

from ris_sim.cli import main as cli_main

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

RUNS = [
    (["--config", str(CONFIGS / "default.yaml"), "--out", "results/fig3", "validate-power"]),
    (["--config", str(CONFIGS / "default.yaml"), "--out", "results/fig4", "outage-sweep"]),
    (["--config", str(CONFIGS / "default.yaml"), "--out", "results/laplace", "validate-laplace"]),
    (["--config", str(CONFIGS / "fig5_sis_panels.yaml"), "sis-sim"]),
    (["--config", str(CONFIGS / "fig6_r0_vs_ue_density.yaml"), "r0-sweep"]),
    (["--config", str(CONFIGS / "fig7_r0_vs_frequency_low.yaml"), "r0-sweep"]),
    (["--config", str(CONFIGS / "fig8_r0_vs_frequency_high.yaml"), "r0-sweep"]),
    (["--config", str(CONFIGS / "fig9_r0_vs_elements_low.yaml"), "r0-sweep"]),
    (["--config", str(CONFIGS / "fig10_r0_vs_elements_high.yaml"), "r0-sweep"]),
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="2e4 trials instead of 1e5")
    args = parser.parse_args()
    for argv in RUNS:
        if args.quick:
            argv = ["--trials", "20000"] + argv
        print(f"== ris-sim {' '.join(argv)}", flush=True)
        code = cli_main(argv)
        if code != 0:
            print(f"command failed with exit code {code}", file=sys.stderr)
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
