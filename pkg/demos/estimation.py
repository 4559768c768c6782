"""Roughness, vol-of-vol and correlation from a daily series, then a forecast."""

import numpy as np

from roughpremium.forecast import forecast_driver
from roughpremium.gauss import DriverConfig
from roughpremium.gfo import SampledPath
from roughpremium.inference import DAYS_PER_YEAR, VolSeries, estimate_h_nu, estimate_rho
from roughpremium.models import ModelParams, simulate_p_measure

H, nu, rho, n = 0.1, 1.0, -0.7, 2000
params = ModelParams(H=H, nu=nu, rho=rho, xi0=0.04, compensated=True)
cfg = DriverConfig(n_steps=n, horizon=n / DAYS_PER_YEAR, n_paths=1, rho=rho, H=H, seed=21)
m = simulate_p_measure(params, cfg)
series = VolSeries.from_values(np.sqrt(m.v[0, 1:]))

est = estimate_h_nu(series)[0]
r = estimate_rho(m.log_S[0, 1:], series, est.H_hat, log_prices=True)[0]
print(f"H_hat = {est.H_hat:.3f} (true {H}), nu_hat = {est.nu_hat:.3f} (true {nu}), rho_hat = {r.rho_hat:.3f} (true {rho})")

z = m.drivers.Z_H[0]
hist = SampledPath(cfg.grid, z)
for days in (1, 5, 20):
    res = forecast_driver(hist, days / DAYS_PER_YEAR, H)
    print(f"{days:>2}-day driver forecast {res.mean:+.4f}, error sd {np.sqrt(res.var):.4f}, last value {z[-1]:+.4f}")
