"""Regenerate the Z_B CDF tables shipped in ``src/isobayes/data/zb_tables.csv``.

Each smoothness vector is simulated once and all three kinds are read off the
same run.  Per-configuration CSVs are cached in ``--work`` so an interrupted
run can be resumed.

    python scripts/make_tables.py --workers 8
"""

import argparse
import logging
from pathlib import Path

from isobayes.intervals import read_zb_tables, write_zb_tables
from isobayes.limitsim import zb_tables

CONFIGS = [
    # (beta, m, horizon, n_outer, n_inner, seed)
    ((1,), 50, 7.0, 5000, 500, 101),
    ((3,), 50, 7.0, 5000, 500, 103),
    ((5,), 50, 7.0, 5000, 500, 105),
    ((1, 1), 5, 5.0, 2000, 500, 211),
    ((3, 1), 5, 5.0, 2000, 500, 231),
    ((3, 3), 5, 5.0, 2000, 500, 233),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--work", default="build/zb_tables")
    ap.add_argument("--out", default=str(Path(__file__).parents[1] / "src/isobayes/data/zb_tables.csv"))
    ap.add_argument("--scale", type=float, default=1.0, help="multiply n_outer by this factor")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    work = Path(args.work)
    work.mkdir(parents=True, exist_ok=True)
    tables = []
    for beta, m, horizon, n_outer, n_inner, seed in CONFIGS:
        n_outer = max(1, int(n_outer * args.scale))
        part = work / f"zb_{'-'.join(map(str, beta))}_{n_outer}x{n_inner}.csv"
        if not part.exists():
            logging.info("simulating beta=%s outer=%d inner=%d", beta, n_outer, n_inner)
            res = zb_tables(n_outer, n_inner, m, horizon, beta, seed, workers=args.workers)
            write_zb_tables([res[k] for k in (1, 2, 3)], part)
        tables.extend(read_zb_tables(part))
    write_zb_tables(tables, args.out)
    logging.info("wrote %d tables to %s", len(tables), args.out)


if __name__ == "__main__":
    main()
