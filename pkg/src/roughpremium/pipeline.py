"""End-to-end premium extraction from realized volatility and variance-swap quotes.

For every quote date the workflow is

1. estimate ``(H, nu)`` and optionally ``rho`` on the trailing window of daily data,
2. forecast ``E^P[v_{T_i}]`` for each quoted tenor from the same window,
3. bootstrap the forward variance curve from the quotes,
4. solve the triangular system for the piecewise-constant premium.

The forecast reads the window as a driver history started at zero:
``Z_s = (log v_s - log v_{s_0}) / nu`` with prefactor ``v_{s_0}``.
"""

from __future__ import annotations

import configparser
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .csvio import TENOR_DAY_COUNT, ingest_price_series, ingest_varswap_quotes, ingest_vol_series, write_csv
from .forecast import forecast_weights, forecast_constant
from .inference import DAYS_PER_YEAR, VolSeries, estimate_h_nu, estimate_rho
from .premium import (
    VarSwapQuoteSet,
    bootstrap_forward_variance,
    extract_premium,
    premium_forward_map,
)

__all__ = [
    "RunConfig",
    "ConfigError",
    "PipelineError",
    "EXIT_OK",
    "EXIT_INVALID",
    "EXIT_NO_WORK",
    "load_config",
    "historical_forecasts",
    "process_date",
    "run_pipeline",
    "make_synthetic_inputs",
]

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NO_WORK = 3


class ConfigError(ValueError):
    pass


class PipelineError(RuntimeError):
    """A module failed on a specific date; ``date`` and ``tenor`` locate it."""

    def __init__(self, msg, date=None, tenor=None):
        where = f" [date={date}" + (f", tenor={tenor}" if tenor is not None else "") + "]" if date is not None else ""
        super().__init__(msg + where)
        self.date = date
        self.tenor = tenor


@dataclass
class RunConfig:
    quotes: str = ""
    vol_series: str = ""
    prices: str = ""
    out: str = "out"
    window: int = 100
    delta_max: int = 30
    H: float | None = None
    nu: float | None = None
    rho: float | None = None
    normalization: str = "lambda"
    workers: int = 1
    synthetic: bool = False
    synthetic_days: int = 600
    seed: int | None = None

    def validate(self, need_files: bool = True):
        if self.normalization not in ("lambda", "gamma", "empirical"):
            raise ConfigError(f"unknown normalization {self.normalization!r}")
        if self.window < 50:
            raise ConfigError("window must be at least 50")
        if self.delta_max < 2 or self.delta_max >= self.window:
            raise ConfigError("delta_max must lie in [2, window)")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        if self.H is not None and not 0 < self.H < 0.5:
            raise ConfigError("H must lie in (0, 1/2)")
        if self.nu is not None and self.nu <= 0:
            raise ConfigError("nu must be positive")
        if self.rho is not None and not -1 < self.rho <= 0:
            raise ConfigError("rho must lie in (-1, 0]")
        if self.synthetic:
            if self.seed is None:
                raise ConfigError("synthetic inputs need a seed")
            return
        if not self.vol_series:
            # without a volatility series nothing can be forecast
            missing = [k for k in ("H", "nu") if getattr(self, k) is None]
            raise ConfigError(
                "a vol_series is required" + (f" (and {', '.join(missing)} cannot be estimated)" if missing else "")
            )
        if need_files:
            for key in ("quotes", "vol_series", "prices"):
                p = getattr(self, key)
                if key != "prices" and not p:
                    raise ConfigError(f"missing {key}")
                if p and not Path(p).exists():
                    raise ConfigError(f"{key} file {p} does not exist")
        if self.normalization != "lambda" and self.rho is None and not self.prices:
            raise ConfigError("this normalization needs rho or a price series")


def load_config(path, **overrides) -> RunConfig:
    """Read a flat ``key = value`` file (INI syntax, one ``[run]`` section).

    Relative file paths are resolved against the directory of the config.
    ``overrides`` that are not None replace file values.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    parser = configparser.ConfigParser()
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not parser.has_section("run"):
        raise ConfigError(f"{path}: missing [run] section")
    sec = parser["run"]
    kinds = {f.name: f.type for f in fields(RunConfig)}
    values = {}
    for key, raw in sec.items():
        if key not in kinds:
            raise ConfigError(f"{path}: unknown key {key!r}")
        values[key] = _parse(key, raw, kinds[key], path)
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    for key in ("quotes", "vol_series", "prices"):
        if values.get(key) and not Path(values[key]).is_absolute():
            values[key] = str(path.parent / values[key])
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def _parse(key, raw, kind, path):
    raw = raw.strip()
    try:
        if kind == "bool":
            return raw.lower() in ("1", "true", "yes", "on")
        if kind == "int":
            return int(raw)
        if "float" in kind:
            return None if raw.lower() in ("", "none") else float(raw)
        if "int" in kind:
            return None if raw.lower() in ("", "none") else int(raw)
    except ValueError:
        raise ConfigError(f"{path}: cannot parse {key} = {raw!r}") from None
    return raw


def historical_forecasts(log_v: np.ndarray, H: float, nu: float, horizons) -> np.ndarray:
    """``E^P[v_{t+D}]`` for each horizon ``D`` (years) from a daily log-variance history ending at ``t``."""
    log_v = np.asarray(log_v, dtype=float)
    z = (log_v - log_v[0]) / nu
    dt = 1.0 / DAYS_PER_YEAR
    out = []
    for d in np.atleast_1d(horizons):
        w = forecast_weights(len(z) - 1, dt, d, H)
        var = forecast_constant(H) * d ** (2 * H) / (2 * H)
        out.append(log_v[0] + nu * (w @ z) + 0.5 * nu**2 * var)
    return np.exp(np.array(out))


@dataclass
class DateResult:
    date: np.datetime64
    tenor_days: np.ndarray
    xi: np.ndarray
    forecasts: np.ndarray
    lam: np.ndarray
    H: float
    nu: float
    rho: float


def process_date(
    quotes: VarSwapQuoteSet, vols: VolSeries, cfg: RunConfig, log_prices: np.ndarray | None = None
) -> DateResult:
    date = quotes.as_of
    end = int(np.searchsorted(vols.dates, date, side="right"))
    if end < cfg.window:
        raise PipelineError(f"only {end} volatility observations up to this date, need {cfg.window}", date)
    a = end - cfg.window
    window = VolSeries(vols.dates[a:end], vols.rv[a:end])
    try:
        if cfg.H is None or cfg.nu is None:
            est = estimate_h_nu(window, delta_max=cfg.delta_max)[0]
        H = cfg.H if cfg.H is not None else min(est.H_hat, 0.499)
        nu = cfg.nu if cfg.nu is not None else est.nu_hat
        if cfg.rho is not None:
            rho = cfg.rho
        elif log_prices is not None:
            rho = estimate_rho(log_prices[a:end], window, H, log_prices=True)[0].rho_hat
            rho = min(rho, 0.0)
        else:
            rho = 0.0
        fc = historical_forecasts(window.log_variance, H, nu, quotes.tenors)
        xi = bootstrap_forward_variance(quotes)
        lam = extract_premium(xi, fc, H, nu, rho, cfg.normalization).values
    except PipelineError:
        raise
    except (ValueError, ArithmeticError) as exc:
        raise PipelineError(str(exc), date) from exc
    days = np.rint(quotes.tenors * TENOR_DAY_COUNT).astype(int)
    return DateResult(date, days, xi.xi, fc, lam, float(H), float(nu), float(rho))


def run_pipeline(cfg: RunConfig, out_dir=None) -> int:
    """Run every quote date and write the output tables; returns an exit status.

    Output files in ``out_dir``: ``lambda.csv`` (``date,tenor_days,lambda``),
    ``xi.csv`` (``date,tenor_days,xi``), ``estimates.csv``,
    ``summary.csv`` (mean premium per tenor) and ``plot_lambda.csv``
    (``x,y,series`` plot data). Rows are sorted by date and tenor, so the
    files do not depend on the number of workers.
    """
    out = Path(out_dir or cfg.out)
    if cfg.synthetic:
        paths = make_synthetic_inputs(out / "inputs", cfg.seed, n_days=cfg.synthetic_days)
        cfg = RunConfig(**{**cfg.__dict__, **{k: str(v) for k, v in paths.items()}, "synthetic": False})
    cfg.validate()
    quote_sets = ingest_varswap_quotes(cfg.quotes)
    if not quote_sets:
        log.warning("no quotes: nothing to do")
        return EXIT_NO_WORK
    vols = ingest_vol_series(cfg.vol_series)
    log_prices = None
    if cfg.prices:
        pdates, px = ingest_price_series(cfg.prices)
        if not np.array_equal(pdates, vols.dates):
            raise PipelineError("price and volatility dates differ")
        log_prices = np.log(px)

    def job(q):
        return process_date(q, vols, cfg, log_prices)

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            results = list(ex.map(job, quote_sets))
    else:
        results = [job(q) for q in quote_sets]
    results.sort(key=lambda r: r.date)
    _write_outputs(out, results)
    return EXIT_OK


def _write_outputs(out: Path, results: list[DateResult]):
    write_csv(
        out / "lambda.csv",
        ["date", "tenor_days", "lambda"],
        ((r.date, d, x) for r in results for d, x in zip(r.tenor_days, r.lam)),
    )
    write_csv(
        out / "xi.csv",
        ["date", "tenor_days", "xi"],
        ((r.date, d, x) for r in results for d, x in zip(r.tenor_days, r.xi)),
    )
    write_csv(
        out / "forecasts.csv",
        ["date", "tenor_days", "p_forecast"],
        ((r.date, d, x) for r in results for d, x in zip(r.tenor_days, r.forecasts)),
    )
    write_csv(out / "estimates.csv", ["date", "H_hat", "nu_hat", "rho_hat"], ((r.date, r.H, r.nu, r.rho) for r in results))
    by_tenor: dict[int, list[float]] = {}
    for r in results:
        for d, x in zip(r.tenor_days, r.lam):
            by_tenor.setdefault(int(d), []).append(float(x))
    tenors = sorted(by_tenor)
    write_csv(
        out / "summary.csv",
        ["tenor_days", "mean_lambda", "std_lambda", "n_dates"],
        ((d, float(np.mean(by_tenor[d])), float(np.std(by_tenor[d])), len(by_tenor[d])) for d in tenors),
    )
    rows = [(str(r.date), x, f"lambda_{d}d") for r in results for d, x in zip(r.tenor_days, r.lam)]
    rows += [("mean", float(np.mean(by_tenor[d])), f"mean_{d}d") for d in tenors]
    write_csv(out / "plot_lambda.csv", ["x", "y", "series"], rows)


SYNTHETIC_TENOR_DAYS = (30, 91, 182, 365, 730)
SYNTHETIC_PREMIUM = (0.6, 0.3, -0.1, 0.2, 0.05)


def make_synthetic_inputs(
    out_dir,
    seed: int,
    n_days: int = 600,
    H: float = 0.1,
    nu: float = 1.0,
    rho: float = -0.7,
    window: int = 100,
    quote_every: int = 20,
    premium=SYNTHETIC_PREMIUM,
    tenor_days=SYNTHETIC_TENOR_DAYS,
) -> dict:
    """Write a reproducible input set generated from a known premium.

    Daily volatility and prices follow the historical dynamics; quotes on
    every ``quote_every``-th day are set so that the forward variance equals
    the historical forecast (true ``H`` and ``nu``) times the exponential of
    the premium forward map. Returns the written paths.
    """
    from .curves import PiecewiseCurve
    from .gauss import DriverConfig
    from .models import ModelParams, simulate_p_measure

    out = Path(out_dir)
    params = ModelParams(H, nu, rho, xi0=0.04, compensated=True)
    cfg = DriverConfig(n_steps=n_days, horizon=n_days / DAYS_PER_YEAR, n_paths=1, rho=rho, H=H, seed=seed)
    m = simulate_p_measure(params, cfg)
    v, logS = m.v[0, 1:], m.log_S[0, 1:] + np.log(100.0)
    dates = np.busday_offset(np.datetime64("2010-01-04", "D"), np.arange(n_days), roll="forward")
    paths = {
        "vol_series": write_csv(out / "vol.csv", ["date", "rv"], zip(dates, np.sqrt(v))),
        "prices": write_csv(out / "prices.csv", ["date", "close"], zip(dates, np.exp(logS))),
    }
    tenors = np.array(tenor_days) / TENOR_DAY_COUNT
    lam = PiecewiseCurve(np.concatenate([[0.0], tenors]), np.array(premium, dtype=float))
    shift = np.exp(premium_forward_map(lam, H, nu, rho))
    rows = []
    for end in range(window, n_days + 1, quote_every):
        # the forecast uses the rv column as written, which round-trips exactly
        fc = historical_forecasts(2.0 * np.log(np.sqrt(v[end - window : end])), H, nu, tenors)
        xi = fc * shift
        total = np.cumsum(xi * np.diff(lam.knots))
        strike = np.sqrt(total / tenors)
        rows += [(dates[end - 1], d, k) for d, k in zip(tenor_days, strike)]
    paths["quotes"] = write_csv(out / "quotes.csv", ["date", "tenor_days", "strike_vol"], rows)
    return paths
