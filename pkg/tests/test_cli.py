import numpy as np
import pytest

from rtsa.cli import CliError, _parse_policy, _parse_seed_range, main
from rtsa.policy import load_weights, random_weights, save_weights
from rtsa.scenario import default_scenario, save_scenario


@pytest.fixture
def scenario_path(tmp_path, calibrated_scenario):
    p = tmp_path / "scenario.json"
    save_scenario(calibrated_scenario, p)
    return str(p)


class TestParsers:
    def test_policy_grammar(self, tmp_path):
        assert _parse_policy("nominal").kind == "nominal"
        assert _parse_policy("baseline:4.5").delta == 4.5
        wpath = tmp_path / "w.json"
        save_weights(random_weights(np.random.default_rng(0)), wpath)
        assert _parse_policy(f"weights:{wpath}").kind == "weights"

    def test_policy_errors(self):
        with pytest.raises(CliError):
            _parse_policy("bogus")
        with pytest.raises(CliError):
            _parse_policy("baseline:zero")
        with pytest.raises(CliError):
            _parse_policy("weights:/nonexistent/file.json")

    def test_seed_range(self):
        assert _parse_seed_range("3..6") == [3, 4, 5]
        with pytest.raises(CliError):
            _parse_seed_range("6..3")
        with pytest.raises(CliError):
            _parse_seed_range("abc")


class TestRun:
    def test_smoke_and_trace(self, scenario_path, tmp_path, capsys):
        trace = tmp_path / "trace.csv"
        rc = main(["run", "--scenario", scenario_path, "--policy", "baseline:8",
                   "--seed", "3", "--trace", str(trace)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "policy=baseline:8" in out
        first = trace.read_text().splitlines()[0]
        assert first.startswith("# scenario_hash=")

    def test_trace_reproducible_byte_for_byte(self, scenario_path, tmp_path):
        t1, t2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for t in (t1, t2):
            assert main(["run", "--scenario", scenario_path, "--policy", "nominal",
                         "--seed", "5", "--trace", str(t)]) == 0
        assert t1.read_bytes() == t2.read_bytes()

    def test_missing_scenario_exits_2(self, capsys):
        rc = main(["run", "--scenario", "/nonexistent.json", "--policy", "nominal",
                   "--seed", "0"])
        assert rc == 2
        assert "error:" in capsys.readouterr().err

    def test_bundled_default_scenario(self, capsys):
        assert main(["run", "--policy", "nominal", "--seed", "1"]) == 0
        assert "outcome=" in capsys.readouterr().out


class TestEvaluate:
    def test_confusion_csv(self, scenario_path, tmp_path, capsys):
        out = tmp_path / "cm.csv"
        rc = main(["evaluate", "--scenario", scenario_path, "--policy", "baseline:4",
                   "--seeds", "0..20", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[1].split(",")[0] == "policy"
        counts = [int(x) for x in lines[2].split(",")[3:]]
        assert sum(counts) == 20

    def test_bad_seed_range_exits_2(self, scenario_path, capsys):
        rc = main(["evaluate", "--scenario", scenario_path, "--policy", "nominal",
                   "--seeds", "5..5"])
        assert rc == 2


class TestWarmstartAndTrain:
    def test_pipeline(self, scenario_path, tmp_path, capsys):
        w0 = tmp_path / "w0.json"
        rc = main(["warmstart", "--scenario", scenario_path, "--delta", "16",
                   "--episodes", "20", "--seed", "0", "--out", str(w0)])
        assert rc == 0
        theta0 = load_weights(w0)
        assert theta0.shape == (9, 2)
        assert np.any(theta0 != 0)

        w1 = tmp_path / "w1.json"
        log = tmp_path / "log.csv"
        rc = main(["train", "--scenario", scenario_path, "--init", str(w0),
                   "--alert-penalty", "0.05", "--episodes", "5", "--seed", "1",
                   "--out", str(w1), "--log", str(log)])
        assert rc == 0
        assert load_weights(w1).shape == (9, 2)
        lines = log.read_text().splitlines()
        assert lines[0].startswith("# scenario_hash=")
        assert len(lines) == 2 + 5  # comment + header + one row per episode

    def test_train_missing_init_exits_2(self, scenario_path, capsys):
        rc = main(["train", "--scenario", scenario_path, "--init", "/nope.json",
                   "--alert-penalty", "0.05", "--episodes", "1", "--seed", "0",
                   "--out", "/tmp/unused.json"])
        assert rc == 2


class TestSoc:
    def test_overlapping_seed_ranges_exit_2(self, scenario_path, tmp_path, capsys):
        rc = main(["soc", "--scenario", scenario_path, "--train-seeds", "0..10",
                   "--eval-seeds", "5..15", "--seed", "0", "--out",
                   str(tmp_path / "soc.csv")])
        assert rc == 2
        assert "overlap" in capsys.readouterr().err

    def test_tiny_sweep(self, scenario_path, tmp_path, capsys):
        out = tmp_path / "soc.csv"
        rc = main(["soc", "--scenario", scenario_path,
                   "--baseline-deltas", "4,8", "--alert-penalties", "0.05",
                   "--train-seeds", "0..30", "--eval-seeds", "100..130",
                   "--seed", "0", "--episodes", "10", "--out", str(out),
                   "--weights-prefix", str(tmp_path / "w_")])
        assert rc == 0
        lines = out.read_text().splitlines()
        # comment + header + nominal + 2 baseline + 1 learned
        assert len(lines) == 6
        families = [ln.split(",")[0] for ln in lines[2:]]
        assert families == ["nominal", "baseline", "baseline", "learned"]
        assert (tmp_path / "w_0.05.json").exists()
        for ln in lines[2:]:
            alert, safe = map(float, ln.split(",")[3:5])
            assert 0.0 <= alert <= 1.0 and 0.0 <= safe <= 1.0


class TestCalibrate:
    def test_writes_calibrated_scenario(self, tmp_path, capsys):
        src = tmp_path / "demo.json"
        save_scenario(default_scenario(), src)
        out = tmp_path / "calibrated.json"
        rc = main(["calibrate", "--scenario", str(src), "--target", "0.25",
                   "--episodes", "120", "--seed", "0", "--out", str(out)])
        assert rc == 0
        assert "calibrated wind_sigma=" in capsys.readouterr().out
        assert out.exists()
