import csv
import json
import math

import numpy as np
import pytest
import yaml

from wrapgp import io
from wrapgp.circular import CircularSample
from wrapgp.cli import main
from wrapgp.config import config_from_dict, load_config

FAST = {"mcmc": {"iterations": 600, "burn_in": 200, "thin": 2},
        "priors": {"alpha0": 12.0, "beta0": 1.1}}


def write_config(tmp_path, extra=None, name="run.yaml"):
    raw = {**FAST, **(extra or {})}
    p = tmp_path / name
    p.write_text(yaml.safe_dump(raw))
    return str(p)


@pytest.fixture
def simulated(tmp_path):
    cfg = write_config(tmp_path, {"sim": {"n_total": 30, "n_estimation": 20}})
    out = tmp_path / "sim"
    assert main(["simulate", "--config", cfg, "--seed", "5", "--out", str(out)]) == 0
    return cfg, out


def rows(path):
    with open(path) as fh:
        return [r for r in csv.reader(l for l in fh if not l.startswith("#"))]


class TestSimulate:
    def test_outputs(self, simulated):
        _, out = simulated
        assert len(rows(out / "sample.csv")) == 31
        assert len(rows(out / "estimation.csv")) == 21
        assert len(rows(out / "validation.csv")) == 11
        assert rows(out / "sample.csv")[0] == ["x_km", "y_km", "angle"]
        truth = json.loads((out / "truth.json").read_text())
        assert truth["sigma2"] == 0.1 and truth["seed"] == 5
        assert "stand-in" in (out / "sample.csv").read_text().splitlines()[0]

    def test_seed_determinism(self, simulated, tmp_path):
        cfg, out = simulated
        again = tmp_path / "again"
        main(["simulate", "--config", cfg, "--seed", "5", "--out", str(again)])
        assert (out / "sample.csv").read_text() == (again / "sample.csv").read_text()

    def test_bad_sigma2_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"sim": {"sigma2": 0.0}})
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 2
        assert "sim.sigma2" in capsys.readouterr().err

    def test_unknown_key_exit_2(self, tmp_path):
        cfg = write_config(tmp_path, {"priors": {"alpah0": 3}})
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 2


class TestFitKrige:
    def test_pipeline(self, simulated, tmp_path):
        cfg, out = simulated
        data = str(out / "estimation.csv")
        assert main(["fit", "--config", cfg, "--seed", "1", "--data", data, "--out", str(out)]) == 0
        assert len(rows(out / "chain.csv")) == 1 + 200
        summary = json.loads((out / "summary.json").read_text())
        assert 0 <= summary["mean_direction"] < 2 * math.pi

        # kriging at the data sites reproduces the observations
        grid = tmp_path / "grid.csv"
        sample = io.read_sample(data)
        np.savetxt(grid, sample.locations, delimiter=",", header="x_km,y_km", comments="")
        kout = tmp_path / "k.csv"
        assert main(["krige", "--config", cfg, "--data", data, "--chain", str(out / "chain.csv"),
                     "--grid", str(grid), "--output", str(kout), "--threads", "2"]) == 0
        k = np.array(rows(kout)[1:], dtype=float)
        assert np.allclose(np.cos(k[:, 2] - sample.angles), 1.0, atol=1e-10)
        assert np.allclose(k[:, 3], 1.0, atol=1e-10)

        # default 10 km grid, and the incoming convention
        g_out, i_out = tmp_path / "g.csv", tmp_path / "i.csv"
        base = ["krige", "--config", cfg, "--data", data, "--chain", str(out / "chain.csv")]
        assert main(base + ["--output", str(g_out)]) == 0
        assert main(base + ["--output", str(i_out), "--incoming"]) == 0
        g = np.array(rows(g_out)[1:], dtype=float)
        i = np.array(rows(i_out)[1:], dtype=float)
        assert g.shape == (375, 5)
        assert np.allclose(np.cos(i[:, 2] - g[:, 2]), -1.0, atol=1e-10)

        # summarize reads the chain back
        assert main(["summarize", "--chain", str(out / "chain.csv")]) == 0

    def test_chain_data_mismatch_exit_4(self, simulated, capsys):
        cfg, out = simulated
        main(["fit", "--config", cfg, "--data", str(out / "estimation.csv"), "--out", str(out)])
        rc = main(["krige", "--config", cfg, "--data", str(out / "validation.csv"),
                   "--chain", str(out / "chain.csv"), "--out", str(out)])
        assert rc == 4
        assert "input mismatch" in capsys.readouterr().err

    def test_duplicate_sites_exit_3(self, tmp_path, capsys):
        data = tmp_path / "dup.csv"
        data.write_text("x_km,y_km,angle\n0,0,0.1\n5,5,0.2\n0,0,0.3\n9,1,0.4\n")
        cfg = write_config(tmp_path)
        assert main(["fit", "--config", cfg, "--data", str(data), "--out", str(tmp_path)]) == 3
        assert "min site separation" in capsys.readouterr().err

    def test_independent_three_angles(self, tmp_path):
        data = tmp_path / "three.csv"
        data.write_text("x_km,y_km,angle\n0,0,0.1\n1,0,0.2\n2,0,6.2\n")
        cfg = write_config(tmp_path, {"model": "independent"})
        assert main(["fit", "--config", cfg, "--data", str(data), "--out", str(tmp_path)]) == 0
        assert (tmp_path / "summary.txt").exists()

    def test_missing_data_exit_2(self, tmp_path):
        assert main(["fit", "--out", str(tmp_path)]) == 2


class TestValidate:
    def test_holdout_and_loo(self, simulated, capsys):
        cfg, out = simulated
        data = str(out / "estimation.csv")
        assert main(["validate", "--config", cfg, "--data", data,
                     "--validation", str(out / "validation.csv"), "--out", str(out)]) == 0
        text = capsys.readouterr().out
        assert "reduction" in text and "%" in text
        report = json.loads((out / "validate.json").read_text())
        assert report["scheme"] == "holdout"
        assert report["percent_reduction"] == pytest.approx(100 * (1 - report["ratio"]))

        assert main(["validate", "--config", cfg, "--data", data, "--fast-loo", "--out", str(out)]) == 0
        assert json.loads((out / "validate.json").read_text())["scheme"] == "leave-one-out (fast)"


class TestConfigAndIo:
    def test_defaults(self):
        c = load_config(None)
        assert c.mcmc.n_retained == 2400
        assert c.model == "spatial" and c.kernel == "exponential"

    def test_inf_strings(self):
        c = config_from_dict({"priors": {"right_trunc": "inf"}})
        assert c.priors.right_trunc == math.inf

    def test_hash_tracks_fit_settings(self):
        a = config_from_dict({})
        assert a.hash() == config_from_dict({"level": 0.9}).hash()
        assert a.hash() != config_from_dict({"priors": {"alpha0": 3}}).hash()

    def test_sample_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        s = CircularSample(rng.uniform(0, 2 * math.pi, 25), rng.uniform(0, 250, (25, 2)))
        io.write_sample(tmp_path / "s.csv", s)
        back = io.read_sample(tmp_path / "s.csv")
        assert np.array_equal(back.angles, s.angles)
        assert np.array_equal(back.locations, s.locations)

    def test_degrees_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        s = CircularSample(rng.uniform(0, 2 * math.pi, 25), rng.uniform(0, 250, (25, 2)))
        io.write_sample(tmp_path / "d.csv", s, "degrees")
        back = io.read_sample(tmp_path / "d.csv", "degrees")
        diff = np.abs(np.remainder(back.angles - s.angles + math.pi, 2 * math.pi) - math.pi)
        assert diff.max() < 1e-12

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_chain_round_trip(self, tmp_path):
        from wrapgp.inference import McmcConfig, fit_spatial
        from wrapgp.sim import SimSpec, simulate

        sim = simulate(SimSpec(n_total=12, n_estimation=8, seed=0))
        d = fit_spatial(sim.estimation, config=McmcConfig(100, 0, 1, seed=0))
        io.write_chain(tmp_path / "c.csv", d, config_hash="x", data_hash=io.data_hash(sim.estimation))
        back, meta = io.read_chain(tmp_path / "c.csv", sim.estimation)
        for f in ("mu", "sigma2", "phi", "k"):
            assert np.array_equal(getattr(back, f), getattr(d, f))
        assert meta["config_hash"] == "x"
