import numpy as np
import pytest

from rtsa.evaluation import (
    ConfusionMatrix,
    EpisodeRecord,
    PolicySpec,
    calibrate_wind,
    confusion,
    exit_rate,
    run_batch,
    run_episode,
    soc_point,
    sweep_baseline,
)
from rtsa.policy import random_weights
from rtsa.sim import Verdict, sample_wind_field


class TestPolicySpec:
    def test_ids(self):
        assert PolicySpec.nominal().policy_id == "nominal"
        assert PolicySpec.baseline(4.0).policy_id == "baseline:4"

    def test_baseline_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            PolicySpec.baseline(0.0)

    def test_weights_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            PolicySpec.weights(np.zeros((4, 2)))


class TestRunEpisode:
    def test_deterministic(self, calibrated_scenario):
        a = run_episode(PolicySpec.nominal(), calibrated_scenario, seed=3)
        b = run_episode(PolicySpec.nominal(), calibrated_scenario, seed=3)
        assert np.array_equal(a.trajectory, b.trajectory)
        assert a.outcome == b.outcome
        assert a.deploy_step == b.deploy_step

    def test_nominal_never_deploys(self, calibrated_scenario):
        for seed in range(5):
            r = run_episode(PolicySpec.nominal(), calibrated_scenario, seed)
            assert r.deploy_step is None
            assert np.all(r.trajectory[:, 7] == 0)

    def test_matched_seeds_identical_wind(self, calibrated_scenario):
        # Two policies on the same seed start from the same wind field, so the
        # trajectories agree exactly until the first deploy.
        nom = run_episode(PolicySpec.nominal(), calibrated_scenario, 7)
        base = run_episode(PolicySpec.baseline(8.0), calibrated_scenario, 7)
        if base.deploy_step is None:
            assert np.array_equal(nom.trajectory, base.trajectory)
        else:
            k = base.deploy_step
            assert np.array_equal(nom.trajectory[: k + 1, :7], base.trajectory[: k + 1, :7])

    def test_causal_prefix_holds_somewhere(self, calibrated_scenario):
        # At least one of the first seeds makes a tight baseline deploy
        # mid-flight, exercising the divergence point.
        deploys = [
            run_episode(PolicySpec.baseline(16.0), calibrated_scenario, s).deploy_step
            for s in range(10)
        ]
        assert any(d is not None for d in deploys)

    def test_latch_is_permanent(self, calibrated_scenario):
        r = run_episode(PolicySpec.baseline(16.0), calibrated_scenario, 0)
        assert r.deploy_step is not None
        actions = r.trajectory[:-1, 7]
        assert np.all(actions[r.deploy_step:] == 1)
        assert np.all(actions[: r.deploy_step] == 0)

    def test_reward_value_set(self, calibrated_scenario):
        alpha = calibrated_scenario.reward.alert_penalty
        for seed in range(5):
            r = run_episode(PolicySpec.baseline(8.0), calibrated_scenario, seed)
            rewards = set(np.round(r.trajectory[:-1, 8], 12))
            assert rewards <= {0.0, -alpha, -1.0}

    def test_alert_penalty_override(self, calibrated_scenario):
        r = run_episode(PolicySpec.baseline(16.0), calibrated_scenario, 0, alert_penalty=0.25)
        assert -0.25 in np.round(r.trajectory[:-1, 8], 12)


class TestRunBatch:
    def test_order_and_length(self, calibrated_scenario):
        records = run_batch(PolicySpec.nominal(), calibrated_scenario, [5, 2, 9])
        assert [r.seed for r in records] == [5, 2, 9]

    def test_rejects_empty(self, calibrated_scenario):
        with pytest.raises(ValueError):
            run_batch(PolicySpec.nominal(), calibrated_scenario, [])

    def test_rejects_duplicates(self, calibrated_scenario):
        with pytest.raises(ValueError):
            run_batch(PolicySpec.nominal(), calibrated_scenario, [1, 1])


class TestConfusion:
    def make_record(self, deployed, outcome):
        traj = np.zeros((3, 9))
        traj[:, 1:4] = 10.0
        return EpisodeRecord(
            seed=0,
            policy_id="test",
            trajectory=traj,
            outcome=outcome,
            deploy_step=0 if deployed else None,
        )

    def test_hand_built_quadrants(self):
        records = [
            self.make_record(False, Verdict.COMPLETED),
            self.make_record(False, Verdict.EXITED),
            self.make_record(True, Verdict.GROUNDED),
            self.make_record(True, Verdict.EXITED),
        ]
        cm = confusion(records)
        assert cm == ConfusionMatrix(1, 1, 1, 1)
        assert cm.total == 4

    def test_trajectory_judging_overrides_label(self, calibrated_scenario):
        traj = np.zeros((3, 9))
        traj[1, 1] = 1e6
        rec = EpisodeRecord(0, "test", traj, Verdict.GROUNDED, deploy_step=0)
        cm = confusion([rec], calibrated_scenario.envelope)
        assert cm.unsafe_deployed == 1

    def test_counts_sum(self, calibrated_scenario):
        records = run_batch(PolicySpec.baseline(4.0), calibrated_scenario, range(20))
        cm = confusion(records, calibrated_scenario.envelope)
        assert cm.total == 20


class TestSocPoint:
    def test_arithmetic(self):
        cm = ConfusionMatrix(
            safe_not_deployed=70, unsafe_not_deployed=5, safe_deployed=20, unsafe_deployed=5
        )
        p = soc_point(cm, parameter=2.0)
        assert p.alert_rate == pytest.approx(0.25)
        assert p.safe_rate == pytest.approx(0.90)
        assert p.episodes == 100

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            soc_point(ConfusionMatrix(), 0.0)


class TestSweepBaseline:
    def test_alert_rate_monotone_in_delta(self, calibrated_scenario):
        points = sweep_baseline(calibrated_scenario, [1.0, 4.0, 16.0], range(60))
        alerts = [p.alert_rate for p in points]
        assert alerts == sorted(alerts)
        assert all(0.0 <= p.alert_rate <= 1.0 and 0.0 <= p.safe_rate <= 1.0 for p in points)

    def test_rejects_unsorted(self, calibrated_scenario):
        with pytest.raises(ValueError):
            sweep_baseline(calibrated_scenario, [4.0, 1.0], range(5))


class TestExitRateAndCalibration:
    def test_zero_wind_no_exits(self, demo_scenario):
        calm = demo_scenario.with_wind(1e-9, 0.0)
        assert exit_rate(calm, range(20)) == 0.0

    def test_wind_monotone_exit_rate(self, demo_scenario):
        low = exit_rate(demo_scenario.with_wind(2.0, 0.5), range(80))
        high = exit_rate(demo_scenario.with_wind(14.0, 3.5), range(80))
        assert high > low

    def test_calibration_hits_target(self, demo_scenario):
        result = calibrate_wind(demo_scenario, 0.25, range(200), tol=0.03)
        assert abs(result.exit_rate - 0.25) <= 0.03
        fresh = exit_rate(
            demo_scenario.with_wind(result.wind_sigma, result.gust_sigma), range(1000, 1200)
        )
        assert 0.15 <= fresh <= 0.35

    def test_rejects_bad_target(self, demo_scenario):
        with pytest.raises(ValueError):
            calibrate_wind(demo_scenario, 0.0, range(10))

    def test_matched_wind_fields(self, calibrated_scenario):
        f1 = sample_wind_field(np.random.default_rng(42), calibrated_scenario.sim)
        f2 = sample_wind_field(np.random.default_rng(42), calibrated_scenario.sim)
        assert np.array_equal(f1.base, f2.base)
        assert np.array_equal(f1.gust_phases, f2.gust_phases)


class TestWeightsPolicy:
    def test_random_weights_episode_runs(self, calibrated_scenario):
        theta = random_weights(np.random.default_rng(8))
        r = run_episode(PolicySpec.weights(theta), calibrated_scenario, 11)
        assert r.outcome in (
            Verdict.COMPLETED, Verdict.EXITED, Verdict.GROUNDED, Verdict.TIMEOUT
        )
        assert np.all(np.isfinite(r.trajectory))
