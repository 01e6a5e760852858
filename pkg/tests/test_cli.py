import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from blindfilter import io as bio
from blindfilter.cli import main
from blindfilter.spectrum import Signal


def report(capsys):
    out = capsys.readouterr().out
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["key", "value"]
    return dict(rows[1:])


def test_gen_and_denoise(tmp_path, capsys):
    x, y, xh = tmp_path / "x.csv", tmp_path / "y.csv", tmp_path / "xh.csv"
    assert main(["gen", "--scenario", "random_spikes", "--n", "40", "--seed", "3",
                 "--snr", "8", "--noisy-output", str(y), "--output", str(x)]) == 0
    rep = report(capsys)
    assert rep["samples"] == "40" and float(rep["sigma"]) == pytest.approx(1 / (8 * np.sqrt(40)))
    assert main(["denoise", "--input", str(y), "--sigma", rep["sigma"], "--output", str(xh)]) == 0
    rep2 = report(capsys)
    assert rep2["converged"] == "true" and rep2["method"] == "penalized"
    truth, est, obs = bio.read_signal(x), bio.read_signal(xh), bio.read_signal(y)
    assert np.linalg.norm(est.values - truth.values) < np.linalg.norm(obs.values - truth.values)


def test_denoise_lasso_and_plot(tmp_path, capsys):
    y = tmp_path / "y.csv"
    bio.write_signal(y, Signal(np.exp(0.3j * np.arange(32))))
    code = main(["denoise", "--input", str(y), "--sigma", "0.01", "--method", "lasso",
                 "--output", str(tmp_path / "o.csv"), "--plot", str(tmp_path / "o.svg")])
    assert code == 0
    assert report(capsys)["method"] == "lasso"
    assert (tmp_path / "o.svg").read_text().lstrip().startswith("<?xml")


def test_denoise_constrained_needs_rho(tmp_path):
    y = tmp_path / "y.csv"
    bio.write_signal(y, Signal(np.ones(10)))
    with pytest.raises(SystemExit):
        main(["denoise", "--input", str(y), "--sigma", "0", "--mode", "constrained", "--output", str(tmp_path / "o.csv")])


def test_denoise_non_convergence_exit_code(tmp_path, capsys):
    y = tmp_path / "y.csv"
    rng = np.random.default_rng(0)
    bio.write_signal(y, Signal(rng.standard_normal(30) + 1j * rng.standard_normal(30)))
    code = main(["denoise", "--input", str(y), "--sigma", "0.1", "--max-iters", "1", "--output", str(tmp_path / "o.csv")])
    assert code == 2
    assert report(capsys)["converged"] == "false"


def test_missing_input_is_error(tmp_path, capsys):
    assert main(["denoise", "--input", str(tmp_path / "none.csv"), "--sigma", "0.1", "--output", str(tmp_path / "o.csv")]) == 1
    assert "error" in capsys.readouterr().err


def test_oracle_unit_circle(tmp_path, capsys):
    out = tmp_path / "q.csv"
    assert main(["oracle", "--roots", "1", "--m", "400", "--output", str(out)]) == 0
    rep = report(capsys)
    assert rep["valid"] == "true" and rep["within_bound"] == "true"
    assert complex(rep["sum_coeffs"]) == pytest.approx(1.0)
    assert bio.read_filter(out).support == ((0, 400),)


def test_oracle_small_m_requires_flag(capsys):
    assert main(["oracle", "--poly", "1,-1", "--m", "64"]) == 1
    assert "387" in capsys.readouterr().err
    assert main(["oracle", "--poly", "1,-1", "--m", "64", "--allow-small-m"]) == 0
    assert report(capsys)["valid"] == "false"


def test_oracle_projector(capsys):
    assert main(["oracle", "--roots", "1,i", "--m", "15", "--kind", "projector"]) == 0
    rep = report(capsys)
    assert rep["within_bound"] == "true"
    assert float(rep["norm"]) <= np.sqrt(2 / 16) + 1e-12


def test_bench_cli(tmp_path, capsys):
    plan = tmp_path / "plan.ini"
    plan.write_text(
        "[bench]\nscenarios = random_spikes\nn = 20\nsnr = 4\ntrials = 2\nseed = 1\n"
        "[method:pen]\nkind = penalized\nlambda_rule = experiment\n"
    )
    assert main(["bench", "--plan", str(plan), "--out", str(tmp_path / "out"), "--no-plot"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].startswith("scenario,method,snr")
    assert (tmp_path / "out" / "results.csv").exists()
    assert not (tmp_path / "out" / "random_spikes.svg").exists()


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "blindfilter", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "denoise" in res.stdout
