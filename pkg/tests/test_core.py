import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ta_explore.core import (
    ContractViolation,
    DualRewardStep,
    EnvSpec,
    RngStream,
    Trajectory,
    episode_return,
    make_rng,
)
from ta_explore.envs import FourTankEnv, RandomWalkEnv, TempControlEnv


def traj_from(rewards_t, rewards_a=None):
    rewards_a = rewards_t if rewards_a is None else rewards_a
    traj = Trajectory(states=[np.zeros(1)])
    n = len(rewards_t)
    for k, (rt, ra) in enumerate(zip(rewards_t, rewards_a)):
        traj.append(None, DualRewardStep(np.zeros(1), rt, ra, k == n - 1))
    return traj


def test_envspec_validation():
    EnvSpec(1, 0, 1.0, 10)
    with pytest.raises(ContractViolation):
        EnvSpec(1, 0, 1.5, 10)
    with pytest.raises(ContractViolation):
        EnvSpec(1, 0, 0.9, 0)
    with pytest.raises(ContractViolation):
        EnvSpec(0, 1, 0.9, 10)
    assert EnvSpec(1, 0, 1.0, 5).is_mrp
    assert not EnvSpec(3, 3, 0.99, 100).is_mrp


def test_episode_return_examples():
    assert episode_return(traj_from([1.0, 1.0, 1.0]), 1.0) == 3.0
    assert episode_return(traj_from([1.0, 1.0]), 0.5) == 1.5


def test_episode_return_rejects_empty():
    with pytest.raises(ContractViolation):
        episode_return(Trajectory(states=[np.zeros(1)]), 1.0)


def test_trajectory_is_absorbing_after_termination():
    traj = traj_from([1.0])
    with pytest.raises(ContractViolation):
        traj.append(None, DualRewardStep(np.zeros(1), 0.0, 0.0, False))
    assert len(traj.states) == len(traj.steps) + 1


finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.tuples(finite, finite), min_size=1, max_size=30),
    st.floats(0.0, 1.0),
    st.floats(0.0, 1.0),
)
def test_blended_return_is_linear(pairs, gamma, beta):
    rt = [p[0] for p in pairs]
    ra = [p[1] for p in pairs]
    traj = traj_from(rt, ra)
    blended = episode_return(traj, gamma, ("blend", beta))
    expected = beta * episode_return(traj, gamma, "assist") + (1 - beta) * episode_return(
        traj, gamma, "target"
    )
    scale = max(1.0, sum(abs(x) for x in rt + ra))
    assert abs(blended - expected) <= 1e-12 * scale


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=1, max_size=30), st.floats(0.0, 1.0))
def test_blend_zero_is_target_bitwise(pairs, gamma):
    traj = traj_from([p[0] for p in pairs], [p[1] for p in pairs])
    assert episode_return(traj, gamma, ("blend", 0.0)) == episode_return(traj, gamma, "target")


def test_rng_stream_reproducible_and_distinct():
    a = RngStream(7, 3).generator().standard_normal(5)
    b = RngStream(7, 3).generator().standard_normal(5)
    c = RngStream(7, 4).generator().standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    x = make_rng(1, 0, "init-state").random(4)
    y = make_rng(1, 0, "policy-sample").random(4)
    z = make_rng(1, 1, "init-state").random(4)
    assert not np.array_equal(x, y) and not np.array_equal(x, z)
    with pytest.raises(ValueError):
        make_rng(1, 0, "bogus")


def rollout(env, seed, steps=30, action=None):
    rng_s = make_rng(seed, 0, "init-state")
    rng_d = make_rng(seed, 0, "dynamics-noise")
    s = env.reset(rng_s)
    out = [s]
    for _ in range(steps):
        step = env.step(s, action, rng_d)
        out.append(step.next_state)
        if step.terminated:
            break
        s = step.next_state
    return np.stack(out)


@pytest.mark.parametrize(
    "env, action",
    [
        (RandomWalkEnv(9), None),
        (TempControlEnv(), np.array([0.1, -0.2, 0.3])),
        (FourTankEnv(), np.array([1.0, 1.0])),
    ],
)
def test_environment_determinism(env, action):
    assert np.array_equal(rollout(env, 11, action=action), rollout(env, 11, action=action))


def test_step_dimension_mismatch_is_contract_violation():
    env = TempControlEnv()
    with pytest.raises(ContractViolation):
        env.step(np.zeros(3), np.zeros(2))
    with pytest.raises(ContractViolation):
        env.step(np.zeros(2), np.zeros(3))
    with pytest.raises(ContractViolation):
        FourTankEnv().step(np.full(4, 10.0), np.zeros(3))
