import numpy as np
import pytest

from rtsa import fastpath
from rtsa._rollout_py import rollout as rollout_python
from rtsa.evaluation import PolicySpec, run_episode, _kernel_scenario_args
from rtsa.geometry import build_path
from rtsa.policy import Action, N_FEATURES, compose_controller, random_weights, rtsa_action
from rtsa.sim import VehicleState, episode_terminated, sample_wind_field, step, wind_at

try:
    from rtsa._rollout_cy import rollout as rollout_compiled
except ImportError:
    rollout_compiled = None

needs_compiled = pytest.mark.skipif(
    rollout_compiled is None, reason="compiled extension not built"
)


def wind_params_for(seed, scenario):
    field = sample_wind_field(np.random.default_rng(seed), scenario.sim)
    return field, np.array(
        [
            field.base[0],
            field.base[1],
            field.gust_amplitude[0],
            field.gust_amplitude[1],
            field.gust_frequencies[0],
            field.gust_frequencies[1],
            field.gust_phases[0],
            field.gust_phases[1],
        ]
    )


def kernel_call(backend, scenario, seed, mode, delta=0.0, theta=None):
    _, wp = wind_params_for(seed, scenario)
    if theta is None:
        theta = np.zeros((N_FEATURES, 2))
    return backend(
        wind_params=wp,
        policy_mode=mode,
        delta=delta,
        theta=theta,
        scales=scenario.feature_scales,
        alert_penalty=scenario.reward.alert_penalty,
        **_kernel_scenario_args(scenario),
    )


@needs_compiled
class TestBackendParity:
    @pytest.mark.parametrize("seed", [0, 1, 7, 42, 1234])
    @pytest.mark.parametrize(
        "mode,delta",
        [
            (fastpath.POLICY_NOMINAL, 0.0),
            (fastpath.POLICY_BASELINE, 4.0),
            (fastpath.POLICY_BASELINE, 16.0),
        ],
    )
    def test_bit_identical_trajectories(self, calibrated_scenario, seed, mode, delta):
        t_py, o_py, d_py = kernel_call(rollout_python, calibrated_scenario, seed, mode, delta)
        t_cy, o_cy, d_cy = kernel_call(rollout_compiled, calibrated_scenario, seed, mode, delta)
        assert o_py == o_cy
        assert d_py == d_cy
        assert np.array_equal(np.asarray(t_py), np.asarray(t_cy))

    @pytest.mark.parametrize("seed", [3, 9, 21])
    def test_bit_identical_weights_policy(self, calibrated_scenario, seed):
        theta = random_weights(np.random.default_rng(seed))
        t_py, o_py, d_py = kernel_call(
            rollout_python, calibrated_scenario, seed, fastpath.POLICY_WEIGHTS, theta=theta
        )
        t_cy, o_cy, d_cy = kernel_call(
            rollout_compiled, calibrated_scenario, seed, fastpath.POLICY_WEIGHTS, theta=theta
        )
        assert (o_py, d_py) == (o_cy, d_cy)
        assert np.array_equal(np.asarray(t_py), np.asarray(t_cy))


class TestKernelMatchesPythonComposition:
    # The kernel mirrors the building-block arithmetic with scalar math while
    # sim.step uses numpy vector ops, so agreement is to rounding error, not
    # bit-for-bit (that guarantee is between the two kernel backends).
    TOL = dict(rtol=1e-6, atol=1e-6)

    @pytest.mark.parametrize("seed", [0, 5, 11])
    def test_baseline_episode_replay(self, calibrated_scenario, seed):
        # Re-simulate the episode with the plain Python building blocks and
        # demand the kernel produced the same states and actions.
        scenario = calibrated_scenario
        record = run_episode(PolicySpec.baseline(8.0), scenario, seed)
        field, _ = wind_params_for(seed, scenario)
        path = build_path(scenario.mission)
        state = VehicleState(
            position=scenario.mission.waypoints[0].copy(),
            velocity=np.zeros(3),
            deployed=False,
        )
        for row in record.trajectory[:-1]:
            np.testing.assert_allclose(row[1:4], state.position, **self.TOL)
            np.testing.assert_allclose(row[4:7], state.velocity, **self.TOL)
            wind = wind_at(field, state.position, state.time)
            action = (
                Action.DEPLOY
                if state.deployed
                or np.min(
                    np.minimum(
                        state.position - scenario.envelope.min_corner,
                        scenario.envelope.max_corner - state.position,
                    )
                )
                <= 8.0
                else Action.CONTINUE
            )
            assert int(row[7]) == int(action)
            u = compose_controller(action, state, path, wind, scenario.sim)
            state = step(state, u, field, scenario.sim)
        last = record.trajectory[-1]
        np.testing.assert_allclose(last[1:4], state.position, **self.TOL)
        np.testing.assert_allclose(last[4:7], state.velocity, **self.TOL)

    def test_weights_episode_actions_match_rtsa_action(self, calibrated_scenario):
        scenario = calibrated_scenario
        theta = random_weights(np.random.default_rng(17))
        record = run_episode(PolicySpec.weights(theta), scenario, 13)
        field, _ = wind_params_for(13, scenario)
        deployed = False
        for row in record.trajectory[:-1]:
            state = VehicleState(position=row[1:4].copy(), velocity=row[4:7].copy(),
                                 time=row[0], deployed=deployed)
            wind = wind_at(field, state.position, state.time)
            action = rtsa_action(theta, state, scenario.envelope, wind,
                                 scenario.feature_scales)
            assert int(row[7]) == int(action)
            deployed = deployed or action == Action.DEPLOY


class TestKernelInvariants:
    @pytest.mark.parametrize("seed", range(8))
    def test_latch_and_reward_set(self, calibrated_scenario, seed):
        record = run_episode(PolicySpec.baseline(8.0), calibrated_scenario, seed)
        actions = record.trajectory[:-1, 7]
        if record.deploy_step is not None:
            assert np.all(actions[record.deploy_step:] == 1)
        alpha = calibrated_scenario.reward.alert_penalty
        assert set(np.round(record.trajectory[:-1, 8], 12)) <= {0.0, -alpha, -1.0}

    def test_termination_reason_consistent(self, calibrated_scenario):
        s = calibrated_scenario
        for seed in range(8):
            record = run_episode(PolicySpec.nominal(), s, seed)
            last = record.trajectory[-1]
            verdict = episode_terminated(
                VehicleState(position=last[1:4], velocity=last[4:7], time=last[0],
                             deployed=False),
                s.envelope, s.mission, len(record.trajectory) - 1, s.sim,
            )
            assert verdict == record.outcome
