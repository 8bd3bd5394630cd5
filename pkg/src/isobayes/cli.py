"""Command-line interface.

Every command writes JSON (sorted keys, two-space indent) to stdout or to the
file named by ``--out``.  ``simulate-zb`` is the exception: ``--out`` names the
table CSV (``kind,d,beta,z,cdf``) and the JSON summary goes to stdout.
Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
import tomli

from .datasets import true_value
from .dhz import dhz_estimate, dhz_interval
from .errors import ConfigError, DataError, StateError, TableRangeError
from .grid import GridSpec, compute_bin_stats
from .immersion import ImmersionKind, isotonize_surface
from .intervals import (Sided, coverage_of_level, credible_interval, find_table,
                        immersion_draws_at, read_zb_tables, recalibrate_level, write_zb_tables)
from .io import emit_json, load_csv
from .limitsim import PRESETS, DriftSpec, zb_tables
from .posterior import (FixedVariance, InverseGammaVariance, MMLEPlugin, PriorSpec,
                        fit_posterior, sigma2_mmle)
from .study import StudyConfig, coverage_study

EXIT_CONFIG = 2
EXIT_DATA = 3

PRIOR_KEYS = {"zeta", "lambda2", "variance_mode", "sigma2", "b1", "b2", "seed"}


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.replace("-", ",").split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _c_gamma(text: str) -> dict[float, float]:
    out = {}
    for item in text.split(","):
        if not item.strip():
            continue
        level, sep, value = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected level=value pairs, got {item!r}")
        try:
            out[float(level)] = float(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad level=value pair {item!r}") from None
    return out


def _read_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _load_prior(path, grid: GridSpec) -> tuple[PriorSpec, int | None]:
    """Prior from a key-value file; ``zeta`` is a number or a CSV of per-cell values."""
    cfg = _read_toml(path) if path else {}
    unknown = sorted(set(cfg) - PRIOR_KEYS)
    if unknown:
        raise ConfigError(f"unknown prior keys: {', '.join(unknown)}")
    mode_name = cfg.get("variance_mode", "mmle")
    if mode_name == "mmle":
        mode = MMLEPlugin()
    elif mode_name == "fixed":
        if "sigma2" not in cfg:
            raise ConfigError("variance_mode 'fixed' needs sigma2")
        mode = FixedVariance(float(cfg["sigma2"]))
    elif mode_name == "inverse_gamma":
        if "b1" not in cfg or "b2" not in cfg:
            raise ConfigError("variance_mode 'inverse_gamma' needs b1 and b2")
        mode = InverseGammaVariance(float(cfg["b1"]), float(cfg["b2"]))
    else:
        raise ConfigError(f"unknown variance_mode {mode_name!r}")
    zeta = cfg.get("zeta", 0.0)
    if isinstance(zeta, str):
        zpath = Path(path).parent / zeta
        try:
            zeta = np.loadtxt(zpath, delimiter=",", ndmin=1).reshape(grid.shape)
        except OSError:
            raise ConfigError(f"cannot read per-cell zeta file {zpath}") from None
        except ValueError as exc:
            raise ConfigError(f"{zpath}: per-cell zeta does not match grid {grid.J}: {exc}") from None
    try:
        zeta = np.broadcast_to(np.asarray(zeta, dtype=float), grid.shape)
        lam = np.full(grid.shape, float(cfg.get("lambda2", 1000.0)))
        prior = PriorSpec(zeta, lam, mode)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    seed = cfg.get("seed")
    return prior, None if seed is None else int(seed)


def _grid(args, data) -> GridSpec:
    if args.J:
        J = args.J if len(args.J) > 1 else args.J * data.d
        if len(J) != data.d:
            raise ConfigError(f"--J has {len(J)} entries, data has d={data.d}")
        return GridSpec(J)
    return GridSpec.from_sample_size(max(data.n, 3), data.d)


def _x0(args, d: int) -> tuple[float, ...]:
    x0 = args.x0 if args.x0 is not None else (0.5,) * d
    if len(x0) != d or not all(0.0 < v < 1.0 for v in x0):
        raise ConfigError(f"x0 must be an interior point of (0,1)^{d}, got {x0}")
    return x0


def _seed(args, fallback: int | None) -> int:
    if args.seed is not None:
        return args.seed
    return fallback if fallback is not None else 0


def _load_data(path):
    try:
        data = load_csv(path)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    if data.n == 0:
        raise DataError(f"{path}: no observations")
    return data


def cmd_fit(args) -> dict:
    data = _load_data(args.data)
    grid = _grid(args, data)
    prior, _ = _load_prior(args.prior, grid)
    stats = compute_bin_stats(data, grid)
    params = fit_posterior(data, stats, prior)
    kind = ImmersionKind.parse(args.kind)
    surface = isotonize_surface(params.mean, stats, kind)
    if params.sigma2 is not None:
        sigma2 = params.sigma2
    else:  # posterior mean of the Inverse-Gamma
        sigma2 = params.ig_scale / (params.ig_shape - 1) if params.ig_shape > 1 else float("inf")
    return {
        "command": "fit",
        "n": data.n,
        "d": data.d,
        "J": list(grid.J),
        "kind": kind.name.lower(),
        "sigma2": sigma2,
        "counts": stats.counts.astype(int),
        "posterior_mean": params.mean,
        "surface": surface.theta,
    }


def _table_for(args, kind: ImmersionKind, d: int):
    beta = args.beta or (1,) * d
    if len(beta) != d:
        raise ConfigError(f"--beta has {len(beta)} entries, data has d={d}")
    try:
        tables = read_zb_tables(args.table) if args.table else None
        return find_table(kind.zb_kind, beta, tables)
    except TableRangeError as exc:
        raise ConfigError(str(exc)) from None
    except OSError as exc:
        raise ConfigError(f"cannot read table {args.table}: {exc.strerror}") from None


def cmd_interval(args) -> dict:
    data = _load_data(args.data)
    grid = _grid(args, data)
    prior, prior_seed = _load_prior(args.prior, grid)
    x0 = _x0(args, data.d)
    kind = ImmersionKind.parse(args.kind)
    sided = Sided.parse(args.sided)
    target = 1.0 - args.level
    credibility = target
    out = {"command": "interval", "x0": list(x0), "kind": kind.name.lower(), "sided": sided.value,
           "level": args.level, "J": list(grid.J), "draws": args.draws}
    if args.recalibrate:
        table = _table_for(args, kind, data.d)
        credibility = recalibrate_level(target, table, sided)
        out["table"] = {"kind": table.kind, "beta": list(table.beta)}
        out["limiting_coverage_unadjusted"] = coverage_of_level(target, table, sided)
    seed = _seed(args, prior_seed)
    draws = immersion_draws_at(data, grid, prior, x0, kind, args.draws, np.random.default_rng(seed))
    ci = credible_interval(draws, credibility, sided)
    out.update(seed=seed, credibility=credibility, lower=ci.lower, upper=ci.upper, length=ci.length)
    return out


def cmd_simulate_zb(args) -> dict:
    preset = PRESETS[args.preset] if args.preset else {}
    d = args.d or preset.get("d")
    if d is None:
        raise ConfigError("give --d or --preset")
    if preset and preset["d"] != d:
        raise ConfigError(f"preset {args.preset} is for d={preset['d']}")
    m = args.m or preset.get("m")
    horizon = args.horizon or preset.get("horizon")
    n_outer = args.outer or preset.get("n_outer")
    n_inner = args.inner or preset.get("n_inner")
    if None in (m, horizon, n_outer, n_inner):
        raise ConfigError("--m, --horizon, --outer and --inner are required without --preset")
    beta = args.beta or (1,) * d
    if len(beta) != d:
        raise ConfigError(f"--beta has {len(beta)} entries, expected d={d}")
    if min(m, n_outer, n_inner) < 1 or horizon <= 0:
        raise ConfigError("sizes must be positive")
    kinds = (1, 2, 3) if args.kind == "all" else (int(args.kind),)
    seed = _seed(args, None)
    tables = zb_tables(n_outer, n_inner, m, horizon, DriftSpec(beta), seed, args.workers, kinds)
    if args.out:
        write_zb_tables([tables[k] for k in kinds], args.out)
    summary = []
    for k in kinds:
        t = tables[k]
        summary.append({
            "kind": k,
            "cdf": {f"{z:.2f}": t.cdf_at(z) for z in (0.5, 0.8, 0.9, 0.95, 0.99)},
            "quantile": {f"{p:.3f}": t.quantile(p) for p in (0.025, 0.05, 0.5, 0.9, 0.95, 0.975)},
        })
    return {"command": "simulate-zb", "d": d, "beta": list(beta), "m": m, "horizon": horizon,
            "outer": n_outer, "inner": n_inner, "seed": seed, "table": args.out,
            "tables": summary}


def _study_config(args, extra: dict | None = None) -> StudyConfig:
    cfg = _read_toml(args.config)
    cfg.update(extra or {})
    if args.seed is not None:
        cfg["seed"] = args.seed
    cfg["workers"] = args.workers
    if "c_gamma" in cfg:
        cfg["c_gamma"] = {float(k): v for k, v in dict(cfg["c_gamma"]).items()}
    return StudyConfig.from_mapping(cfg)


def cmd_coverage(args) -> dict:
    return coverage_study(_study_config(args)).to_dict()


def cmd_compare_dhz(args) -> dict:
    if not args.c_gamma:
        raise ConfigError("compare-dhz needs explicit critical values: --c-gamma level=value,...")
    if args.config:
        return coverage_study(_study_config(args, {"c_gamma": args.c_gamma})).to_dict()
    if not args.data:
        raise ConfigError("compare-dhz needs a study config or --data")
    data = _load_data(args.data)
    grid = _grid(args, data)
    prior, prior_seed = _load_prior(args.prior, grid)
    x0 = _x0(args, data.d)
    seed = _seed(args, prior_seed)
    draws = immersion_draws_at(data, grid, prior, x0, ImmersionKind.AVERAGE, args.draws,
                               np.random.default_rng(seed))
    est = dhz_estimate(data, x0)
    sigma_hat = float(np.sqrt(sigma2_mmle(compute_bin_stats(data, grid), prior, data)))
    rows = []
    for level, c in sorted(args.c_gamma.items()):
        ib = credible_interval(draws, 1.0 - level)
        dz = dhz_interval(est, sigma_hat, c, level)
        rows.append({"level": level, "method": "IB", "lower": ib.lower, "upper": ib.upper,
                     "length": ib.length})
        rows.append({"level": level, "method": "DHZ", "lower": dz.lower, "upper": dz.upper,
                     "length": dz.length, "c_gamma": c})
    out = {"command": "compare-dhz", "x0": list(x0), "J": list(grid.J), "seed": seed,
           "sigma_hat": sigma_hat, "dhz": {"f_minus": est.f_minus, "f_plus": est.f_plus,
                                          "f_hat": est.f_hat, "block_count": est.block_count},
           "rows": rows}
    if args.function:
        out["truth"] = true_value(args.function, x0)
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="RNG seed")
    common.add_argument("--workers", type=int, default=argparse.SUPPRESS,
                        help="worker processes (results do not depend on this)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="write JSON here instead of stdout")

    p = argparse.ArgumentParser(prog="isobayes", parents=[common],
                                description="Immersion-posterior isotonic regression tools.")
    sub = p.add_subparsers(dest="command", required=True)

    def data_args(sp, x0=True):
        sp.add_argument("--J", type=_ints, help="cells per axis (one value or one per axis)")
        sp.add_argument("--prior", help="prior config file (zeta, lambda2, variance_mode, b1, b2, sigma2, seed)")
        if x0:
            sp.add_argument("--x0", type=_floats, help="evaluation point, comma-separated")

    sp = sub.add_parser("fit", parents=[common], help="isotonized posterior-mean surface")
    sp.add_argument("data", help="CSV with header x1,...,xd,y")
    data_args(sp, x0=False)
    sp.add_argument("--kind", default="average", help="lower, upper or average")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("interval", parents=[common], help="credible interval at a point")
    sp.add_argument("data")
    data_args(sp)
    sp.add_argument("--level", type=float, default=0.05, help="1 - credibility")
    sp.add_argument("--kind", default="average")
    sp.add_argument("--sided", default="two_sided_equal_tail")
    sp.add_argument("--draws", type=int, default=2000)
    sp.add_argument("--recalibrate", action="store_true",
                    help="pick the credibility whose limiting coverage is 1 - level")
    sp.add_argument("--beta", type=_ints, help="smoothness vector for the table lookup")
    sp.add_argument("--table", help="Z_B table CSV (default: bundled tables)")
    sp.set_defaults(func=cmd_interval)

    sp = sub.add_parser("simulate-zb", parents=[common], help="Monte Carlo Z_B tables")
    sp.add_argument("--preset", choices=sorted(PRESETS))
    sp.add_argument("--d", type=int, choices=(1, 2))
    sp.add_argument("--beta", type=_ints)
    sp.add_argument("--kind", default="all", choices=("1", "2", "3", "all"))
    sp.add_argument("--m", type=int)
    sp.add_argument("--horizon", type=float)
    sp.add_argument("--outer", type=int)
    sp.add_argument("--inner", type=int)
    sp.set_defaults(func=cmd_simulate_zb)

    sp = sub.add_parser("coverage", parents=[common], help="coverage study from a TOML config")
    sp.add_argument("config")
    sp.set_defaults(func=cmd_coverage)

    sp = sub.add_parser("compare-dhz", parents=[common], help="immersion vs DHZ intervals")
    sp.add_argument("config", nargs="?", help="study config; omit to compare on --data")
    sp.add_argument("--c-gamma", type=_c_gamma, help="critical values, e.g. 0.05=1.2,0.1=1.0")
    sp.add_argument("--data")
    sp.add_argument("--function", help="true function id, reported alongside --data results")
    sp.add_argument("--draws", type=int, default=2000)
    data_args(sp)
    sp.set_defaults(func=cmd_compare_dhz)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for name, default in (("seed", None), ("workers", 1), ("out", None)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be positive")
        result = args.func(args)
        # simulate-zb uses --out for its table CSV; its JSON summary goes to stdout
        json_path = None if args.command == "simulate-zb" else args.out
        text = emit_json(result, json_path)
    except (DataError, StateError) as exc:
        print(f"isobayes: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, KeyError) as exc:
        # ConfigError, TableRangeError and bad enum names from the command line
        print(f"isobayes: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if json_path is None:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
