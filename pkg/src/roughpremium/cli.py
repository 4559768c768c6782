"""Command-line entry point: ``roughpremium <subcommand> [options]``.

Model options may come from flags or from the ``[model]`` section of the
``--config`` file; flags win. Randomized subcommands require ``--seed``.
Exit status is 0 on success, 2 on invalid input and 3 when there is no work.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from .cir import CirParams, RiccatiDivergence, solve_riccati
from .csvio import InputError, ingest_price_series, ingest_varswap_quotes, ingest_vol_series, write_csv
from .forecast import forecast_driver
from .gauss import DriverConfig
from .gfo import SampledPath
from .inference import DAYS_PER_YEAR, estimate_h_nu, estimate_rho
from .measure import GirsanovSpec, martingale_test, radon_nikodym_path
from .models import DeterministicPremium, ModelParams, iter_p_measure, iter_q_measure, price_variance_swap
from .pipeline import EXIT_INVALID, EXIT_NO_WORK, EXIT_OK, ConfigError, PipelineError, RunConfig, load_config
from .pipeline import process_date, run_pipeline
from .premium import bootstrap_forward_variance

log = logging.getLogger("roughpremium")

MODEL_KEYS = {
    "H": float, "nu": float, "rho": float, "xi0": float, "r": float, "mu": float,
    "premium": float, "horizon": float, "gamma": float, "compensated": bool,
}  # fmt: skip
MODEL_DEFAULTS = {
    "H": 0.1, "nu": 1.5, "rho": -0.7, "xi0": 0.04, "r": 0.0, "mu": 0.0,
    "premium": 0.0, "horizon": 1.0, "gamma": 0.0, "compensated": True,
}  # fmt: skip


class UsageError(ValueError):
    pass


def _common(p: argparse.ArgumentParser, seed_required=False):
    p.add_argument("--config", type=Path, help="INI file with [model] and/or [run] sections")
    p.add_argument("--seed", type=int, required=seed_required, help="random seed (unsigned 64-bit)")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--paths", type=int, default=10_000)
    p.add_argument("--steps", type=int, default=256)


def _model_flags(p: argparse.ArgumentParser):
    for k, kind in MODEL_KEYS.items():
        if kind is bool:
            p.add_argument(f"--{k}", action=argparse.BooleanOptionalAction, default=None)
        else:
            p.add_argument(f"--{k}", type=float, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--scheme", choices=["exact", "left"], default="exact")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roughpremium", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate paths and write per-time statistics")
    _common(p, seed_required=True)
    _model_flags(p)
    p.add_argument("--measure", choices=["P", "Q"], default="Q")
    p.add_argument("--save-paths", type=int, default=0, help="also write this many sample paths")

    p = sub.add_parser("price-varswap", help="Monte Carlo variance-swap strikes")
    _common(p, seed_required=True)
    _model_flags(p)
    p.add_argument("--maturities", type=float, nargs="+", required=True, help="years, on the grid")

    p = sub.add_parser("verify-martingale", help="check E[D_T] = 1 and E[S_T / B_T] = S_0")
    _common(p, seed_required=True)
    _model_flags(p)
    p.add_argument("--strict", action="store_true", help="exit 1 if a test fails")

    p = sub.add_parser("riccati", help="solve the square-root premium Riccati system")
    _common(p)
    for k in ("kappa", "theta", "sigma", "nu", "H", "T"):
        p.add_argument(f"--{k}", type=float, required=True)

    p = sub.add_parser("estimate", help="rolling roughness, vol-of-vol and correlation")
    _common(p)
    p.add_argument("--vol", type=Path, required=True, help="CSV date,rv")
    p.add_argument("--prices", type=Path, help="CSV date,close")
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--delta-max", type=int, default=30)

    p = sub.add_parser("forecast", help="conditional forecast of the driver and of variance")
    _common(p)
    p.add_argument("--history", type=Path, required=True, help="CSV date,rv")
    p.add_argument("--horizon-days", type=float, nargs="+", required=True, help="trading days")
    p.add_argument("--H", type=float, required=True)
    p.add_argument("--nu", type=float, required=True)

    p = sub.add_parser("bootstrap-xi", help="forward variance from variance-swap quotes")
    _common(p)
    p.add_argument("--quotes", type=Path, required=True, help="CSV date,tenor_days,strike_vol")

    p = sub.add_parser("extract-premium", help="piecewise-constant premium per quote date")
    _common(p)
    p.add_argument("--quotes", type=Path, required=True)
    p.add_argument("--vol", type=Path, required=True)
    p.add_argument("--prices", type=Path)
    p.add_argument("--window", type=int, default=100)
    p.add_argument("--H", type=float)
    p.add_argument("--nu", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--normalization", choices=["lambda", "gamma", "empirical"], default="lambda")

    p = sub.add_parser("run-pipeline", help="full workflow driven by a config file")
    _common(p)
    p.add_argument("--workers", type=int, default=None)
    return parser


def _model(args) -> tuple[ModelParams, dict]:
    vals = dict(MODEL_DEFAULTS)
    if args.config is not None:
        if not args.config.exists():
            raise UsageError(f"config file {args.config} does not exist")
        cp = configparser.ConfigParser()
        cp.read(args.config, encoding="utf-8")
        if cp.has_section("model"):
            for k, raw in cp["model"].items():
                key = {kk.lower(): kk for kk in MODEL_KEYS}.get(k)
                if key is None:
                    raise UsageError(f"{args.config}: unknown model key {k!r}")
                kind = MODEL_KEYS[key]
                vals[key] = cp["model"].getboolean(k) if kind is bool else kind(raw)
    for k in MODEL_KEYS:
        v = getattr(args, k, None)
        if v is not None:
            vals[k] = v
    if args.paths < 1 or args.steps < 1:
        raise UsageError("--paths and --steps must be positive")
    params = ModelParams(
        vals["H"], vals["nu"], vals["rho"], vals["xi0"], vals["r"], vals["mu"], compensated=vals["compensated"]
    )
    return params, vals


def _driver(args, params, vals, n_paths=None) -> DriverConfig:
    return DriverConfig(
        n_steps=args.steps,
        horizon=vals["horizon"],
        n_paths=n_paths or args.paths,
        rho=params.rho,
        H=params.H,
        seed=args.seed,
        scheme=args.scheme,
    )


def _stats(sum_, sumsq, n):
    mean = sum_ / n
    var = np.maximum(sumsq / n - mean**2, 0.0) * n / max(n - 1, 1)
    return mean, np.sqrt(var / n)


def cmd_simulate(args) -> int:
    params, vals = _model(args)
    cfg = _driver(args, params, vals)
    it = (
        iter_p_measure(params, cfg, args.workers)
        if args.measure == "P"
        else iter_q_measure(params, DeterministicPremium(vals["premium"]), cfg, args.workers)
    )
    acc = {k: 0.0 for k in ("v", "v2", "s", "s2")}
    saved = []
    for m in it:
        acc["v"] = acc["v"] + m.v.sum(0)
        acc["v2"] = acc["v2"] + (m.v**2).sum(0)
        disc = m.discounted
        acc["s"] = acc["s"] + disc.sum(0)
        acc["s2"] = acc["s2"] + (disc**2).sum(0)
        need = args.save_paths - sum(len(x) for x in saved)
        if need > 0:
            saved.append(m.v[:need])
    mv, sv = _stats(acc["v"], acc["v2"], cfg.n_paths)
    ms, ss = _stats(acc["s"], acc["s2"], cfg.n_paths)
    write_csv(args.out / "simulate.csv", ["t", "mean_v", "se_v", "mean_discounted_S", "se_discounted_S"],
              zip(cfg.grid, mv, sv, ms, ss))  # fmt: skip
    if saved:
        V = np.concatenate(saved)
        write_csv(args.out / "paths_v.csv", ["t"] + [f"path_{i}" for i in range(len(V))], zip(cfg.grid, *V))
    return EXIT_OK


def cmd_price_varswap(args) -> int:
    params, vals = _model(args)
    vals["horizon"] = max(vals["horizon"], max(args.maturities))
    cfg = _driver(args, params, vals)
    rows = []
    for T in sorted(args.maturities):
        k, se = price_variance_swap(params, DeterministicPremium(vals["premium"]), cfg, T, args.workers)
        rows.append((T, k, se, float(np.sqrt(k))))
    write_csv(args.out / "varswap.csv", ["maturity", "strike_var", "se", "strike_vol"], rows)
    return EXIT_OK


def cmd_verify_martingale(args) -> int:
    params, vals = _model(args)
    cfg = _driver(args, params, vals)
    spec = GirsanovSpec(vals["gamma"])
    dens, spot_p, spot_q = [], [], []
    for m in iter_p_measure(params, cfg, args.workers):
        d = radon_nikodym_path(spec, params, m).values[:, -1]
        dens.append(d)
        spot_p.append(m.discounted[:, -1] * d)
    for m in iter_q_measure(params, DeterministicPremium(params.rho_bar * vals["gamma"]), cfg, args.workers):
        spot_q.append(m.discounted[:, -1])
    reports = [
        martingale_test(np.concatenate(dens), 1.0, name="density"),
        martingale_test(np.concatenate(spot_q) / params.s0, 1.0, name="discounted_spot_Q"),
        martingale_test(np.concatenate(spot_p) / params.s0, 1.0, name="weighted_discounted_spot_P"),
    ]
    write_csv(args.out / "martingale.csv", ["test", "n", "mean", "se", "z", "verdict"], (r.row() for r in reports))
    for r in reports:
        print(f"{r.name}: mean={r.mean:.6f} se={r.se:.6f} z={r.z:+.2f} {'pass' if r.passed else 'FAIL'}")
    if args.strict and not all(r.passed for r in reports):
        return 1
    return EXIT_OK


def cmd_riccati(args) -> int:
    p = CirParams(args.kappa, args.theta, args.sigma, 0.0)
    sol = solve_riccati(p, args.nu, args.H, args.T, max(args.steps, 16))
    write_csv(args.out / "riccati.csv", ["t", "C", "A"], zip(sol.grid, sol.C, sol.A))
    return EXIT_OK


def cmd_estimate(args) -> int:
    vols = ingest_vol_series(args.vol)
    est = estimate_h_nu(vols, args.window, delta_max=args.delta_max, step=args.step)
    rhos = [None] * len(est)
    if args.prices:
        dates, px = ingest_price_series(args.prices)
        rhos = [
            r.rho_hat
            for r in estimate_rho(px, vols, [e.H_hat for e in est], args.window, args.step, price_dates=dates)
        ]
    rows = [(e.window[1], e.H_hat, e.nu_hat, "" if r is None else r) for e, r in zip(est, rhos)]
    write_csv(args.out / "estimates.csv", ["window_end", "H_hat", "nu_hat", "rho_hat"], rows)
    return EXIT_OK


def cmd_forecast(args) -> int:
    vols = ingest_vol_series(args.history)
    logv = vols.log_variance
    if args.nu <= 0:
        raise UsageError("--nu must be positive")
    z = (logv - logv[0]) / args.nu
    hist = SampledPath(np.arange(len(z)) / DAYS_PER_YEAR, z)
    rows = []
    for days in args.horizon_days:
        if days <= 0:
            raise UsageError("horizons must be positive")
        res = forecast_driver(hist, days / DAYS_PER_YEAR, args.H)
        v = float(np.exp(logv[0] + args.nu * res.mean + 0.5 * args.nu**2 * res.var))
        rows.append((days, res.mean, res.var, v))
    write_csv(args.out / "forecast.csv", ["horizon", "mean", "var", "v_forecast"], rows)
    return EXIT_OK


def cmd_bootstrap_xi(args) -> int:
    sets = ingest_varswap_quotes(args.quotes)
    if not sets:
        return EXIT_NO_WORK
    rows = []
    for q in sets:
        xi = bootstrap_forward_variance(q)
        rows += [(q.as_of, int(round(t * 365)), x) for t, x in zip(q.tenors, xi.xi)]
    write_csv(args.out / "xi.csv", ["date", "tenor_days", "xi"], rows)
    return EXIT_OK


def cmd_extract_premium(args) -> int:
    cfg = RunConfig(
        quotes=str(args.quotes), vol_series=str(args.vol), prices=str(args.prices or ""), window=args.window,
        H=args.H, nu=args.nu, rho=args.rho, normalization=args.normalization,
    )  # fmt: skip
    cfg.validate()
    sets = ingest_varswap_quotes(cfg.quotes)
    if not sets:
        return EXIT_NO_WORK
    vols = ingest_vol_series(cfg.vol_series)
    logp = None
    if cfg.prices:
        dates, px = ingest_price_series(cfg.prices)
        if not np.array_equal(dates, vols.dates):
            raise UsageError("price and volatility dates differ")
        logp = np.log(px)
    rows = []
    for q in sets:
        r = process_date(q, vols, cfg, logp)
        rows += [(r.date, d, x) for d, x in zip(r.tenor_days, r.lam)]
    write_csv(args.out / "lambda.csv", ["date", "tenor_days", "lambda"], rows)
    return EXIT_OK


def cmd_run_pipeline(args) -> int:
    if args.config is None:
        raise UsageError("run-pipeline needs --config")
    cfg = load_config(args.config, seed=args.seed, workers=args.workers, out=str(args.out))
    return run_pipeline(cfg)


COMMANDS = {
    "simulate": cmd_simulate,
    "price-varswap": cmd_price_varswap,
    "verify-martingale": cmd_verify_martingale,
    "riccati": cmd_riccati,
    "estimate": cmd_estimate,
    "forecast": cmd_forecast,
    "bootstrap-xi": cmd_bootstrap_xi,
    "extract-premium": cmd_extract_premium,
    "run-pipeline": cmd_run_pipeline,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_INVALID
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return COMMANDS[args.command](args)
    except (UsageError, ConfigError, InputError, PipelineError, RiccatiDivergence, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
