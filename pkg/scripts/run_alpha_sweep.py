#!/usr/bin/env python3
"""Run the baseline alpha sweep and write the CSV curve.

Defaults reproduce the headline experiment for the analytic statistics
(LLR, QM, LM) with 200 placements per alpha.  Add GLLR explicitly if you
can afford the Monte Carlo budget, e.g.:

    python scripts/run_alpha_sweep.py --statistics gllr,qm,lm \
        --placements 24 --mc-samples 20000 --output gllr_sweep.csv
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from coopsense.cli import main

if __name__ == "__main__":
    sys.exit(main())
