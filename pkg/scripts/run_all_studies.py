#!/usr/bin/env python3
"""Run every shipped convergence study, write CSVs, print a slope summary.

Usage: python scripts/run_all_studies.py [output_dir]
"""

import sys
import time
from pathlib import Path

from levyspde.studies import emit_csv, preset_studies, run_study


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("results")
    out.mkdir(parents=True, exist_ok=True)
    any_fail = False
    for name, config in preset_studies().items():
        t0 = time.time()
        result = run_study(config)
        emit_csv(result, str(out / f"{name}.csv"))
        s = result.summary()
        status = "pass" if result.passed() else "FAIL"
        any_fail |= not result.passed()
        print(
            f"{name:24s} weak {s['weak_slope']: .3f} (>= {s['weak_expected'] - 0.15:.2f})  "
            f"strong {s['strong_slope']: .3f} ({s['strong_expected']:.3f} +- 0.15)  "
            f"[{status}, {time.time() - t0:.1f}s]"
        )
    print(f"CSV files in {out}/")
    return 2 if any_fail else 0


if __name__ == "__main__":
    sys.exit(main())
