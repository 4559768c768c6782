import numpy as np
import pytest

from roughpremium.cli import main
from roughpremium.csvio import read_csv
from roughpremium.pipeline import make_synthetic_inputs


@pytest.fixture(scope="module")
def inputs(tmp_path_factory):
    return make_synthetic_inputs(tmp_path_factory.mktemp("cli"), seed=3, n_days=200)


def test_simulate_writes_statistics(tmp_path):
    rc = main(["simulate", "--seed", "1", "--paths", "200", "--steps", "16", "--out", str(tmp_path), "--save-paths", "3"])
    assert rc == 0
    header, rows = read_csv(tmp_path / "simulate.csv")
    assert header[0] == "t" and len(rows) == 17
    header, _ = read_csv(tmp_path / "paths_v.csv")
    assert header == ["t", "path_0", "path_1", "path_2"]


def test_simulate_requires_seed(tmp_path):
    assert main(["simulate", "--out", str(tmp_path)]) == 2
    assert main(["simulate", "--seed", "-4", "--out", str(tmp_path)]) == 2


def test_invalid_model_is_exit_two(tmp_path, capsys):
    assert main(["simulate", "--seed", "1", "--rho", "0.5", "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_price_varswap(tmp_path):
    rc = main(
        ["price-varswap", "--seed", "5", "--paths", "500", "--steps", "20", "--maturities", "0.5", "1.0",
         "--out", str(tmp_path)]
    )  # fmt: skip
    assert rc == 0
    _, rows = read_csv(tmp_path / "varswap.csv")
    assert [float(r[0]) for r in rows] == [0.5, 1.0]


def test_verify_martingale_strict(tmp_path):
    rc = main(["verify-martingale", "--seed", "2", "--paths", "2000", "--steps", "16", "--gamma", "0.3",
               "--strict", "--out", str(tmp_path)])  # fmt: skip
    assert rc == 0
    _, rows = read_csv(tmp_path / "martingale.csv")
    assert len(rows) == 3


def test_riccati(tmp_path):
    rc = main(["riccati", "--kappa", "1", "--theta", "0.2", "--sigma", "0.3", "--nu", "0.5", "--H", "0.1",
               "--T", "1", "--steps", "32", "--out", str(tmp_path)])  # fmt: skip
    assert rc == 0
    _, rows = read_csv(tmp_path / "riccati.csv")
    assert float(rows[-1][1]) == 0.0 and float(rows[0][1]) < 0


def test_estimate_and_forecast(tmp_path, inputs):
    assert main(["estimate", "--vol", str(inputs["vol_series"]), "--prices", str(inputs["prices"]),
                 "--window", "150", "--step", "25", "--out", str(tmp_path)]) == 0  # fmt: skip
    _, rows = read_csv(tmp_path / "estimates.csv")
    assert len(rows) == 3 and all(r[3] for r in rows)
    assert main(["forecast", "--history", str(inputs["vol_series"]), "--horizon-days", "5", "20",
                 "--H", "0.1", "--nu", "1", "--out", str(tmp_path)]) == 0  # fmt: skip
    _, rows = read_csv(tmp_path / "forecast.csv")
    assert len(rows) == 2 and all(float(r[3]) > 0 for r in rows)


def test_bootstrap_and_extract(tmp_path, inputs):
    assert main(["bootstrap-xi", "--quotes", str(inputs["quotes"]), "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "xi.csv")
    assert {int(r[1]) for r in rows} == {30, 91, 182, 365, 730}
    rc = main(["extract-premium", "--quotes", str(inputs["quotes"]), "--vol", str(inputs["vol_series"]),
               "--H", "0.1", "--nu", "1", "--out", str(tmp_path)])  # fmt: skip
    assert rc == 0
    _, rows = read_csv(tmp_path / "lambda.csv")
    np.testing.assert_allclose([float(r[2]) for r in rows[:5]], [0.6, 0.3, -0.1, 0.2, 0.05], atol=1e-8)


def test_empty_quotes_exit_three(tmp_path):
    q = tmp_path / "q.csv"
    q.write_text("date,tenor_days,strike_vol\n")
    assert main(["bootstrap-xi", "--quotes", str(q), "--out", str(tmp_path)]) == 3


def test_run_pipeline_needs_config(tmp_path):
    assert main(["run-pipeline", "--out", str(tmp_path)]) == 2
    assert main(["run-pipeline", "--config", str(tmp_path / "missing.ini"), "--out", str(tmp_path)]) == 2


def test_run_pipeline_synthetic(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nsynthetic = true\nsynthetic_days = 180\n")
    assert main(["run-pipeline", "--config", str(cfg), "--seed", "4", "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "summary.csv").exists()


def test_unknown_command():
    assert main(["frobnicate"]) == 2
