"""Full coverage grid: five functions, n in {200, 500, 1000, 2000}, 2000 replications.

Long running (hours on a workstation).  Not part of the test suite.

    python scripts/coverage_grid.py --workers 8 --out coverage_grid.json
    python scripts/coverage_grid.py --c-gamma 0.05=1.2 ...   # adds DHZ rows
"""

import argparse
import logging

from isobayes.cli import _c_gamma
from isobayes.io import emit_json
from isobayes.study import StudyConfig, coverage_study


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--functions", default="f1,f2,f3,f4,f5")
    ap.add_argument("--sizes", default="200,500,1000,2000")
    ap.add_argument("--levels", default="0.05")
    ap.add_argument("--replications", type=int, default=2000)
    ap.add_argument("--draws", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--c-gamma", type=_c_gamma, default={})
    ap.add_argument("--out", default="coverage_grid.json")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    levels = tuple(float(v) for v in args.levels.split(","))
    rows = []
    for function in args.functions.split(","):
        for n in (int(v) for v in args.sizes.split(",")):
            logging.info("%s n=%d", function, n)
            cfg = StudyConfig(function=function, n=n, levels=levels,
                              replications=args.replications, draws=args.draws,
                              seed=args.seed, workers=args.workers, c_gamma=args.c_gamma)
            rows.extend(coverage_study(cfg).rows)
    emit_json(rows, args.out)


if __name__ == "__main__":
    main()
