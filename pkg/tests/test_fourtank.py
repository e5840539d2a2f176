import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ta_explore.core import ContractViolation
from ta_explore.envs import DEFAULT_COEFFS, DIRECT_COEFFS, FourTankEnv

levels = st.floats(3.0, 30.0)
volts = st.floats(-5.0, 20.0)


def test_defaults():
    env = FourTankEnv()
    assert env.mode == "incremental"
    assert tuple(env.c) == DEFAULT_COEFFS
    assert tuple(FourTankEnv(mode="direct").c) == DIRECT_COEFFS
    assert env.spec.state_dim == 4 and env.spec.action_dim == 2 and env.spec.horizon == 100


@pytest.mark.parametrize("bad", [(1.0,) * 9, (1.0,) * 9 + (0.0,), (1.0,) * 9 + (-2.0,)])
def test_rejects_bad_coefficients(bad):
    with pytest.raises(ContractViolation):
        FourTankEnv(coeffs=bad)


def test_reset_support_and_mean():
    env = FourTankEnv()
    rng = np.random.default_rng(0)
    x = np.stack([env.reset(rng) for _ in range(100_000)])
    assert x.min() >= 3.0 and x.max() <= 30.0
    se = (27.0 / np.sqrt(12.0)) / np.sqrt(len(x))
    assert np.all(np.abs(x.mean(axis=0) - 16.5) <= 3 * se)
    assert np.array_equal(env.reset(np.random.default_rng(5)), env.reset(np.random.default_rng(5)))


def test_zero_action_violates_in_direct_mode():
    env = FourTankEnv(mode="direct")
    s = np.array([10.0, 12.0, 20.0, 25.0])
    step = env.step(s, np.zeros(2))
    c = env.c
    assert step.next_state[2] == pytest.approx(-c[6] * np.sqrt(20.0))
    assert step.next_state[3] == pytest.approx(-c[8] * np.sqrt(25.0))
    assert step.terminated
    assert (step.r_target, step.r_assist) == (-100.0, -100.0)


def test_full_pump_cost():
    env = FourTankEnv()
    step = env.step(np.full(4, 5.0), np.array([12.0, 12.0]))
    assert env.satisfied(step.next_state)
    assert step.r_target == -288.0 and step.r_assist == 0.0


@given(k=levels, a=st.tuples(volts, volts), mode=st.sampled_from(["direct", "incremental"]))
def test_symmetric_tanks_stay_level(k, a, mode):
    env = FourTankEnv(coeffs=(0.3, 0.2, 0.1, 0.3, 0.2, 0.1, 0.4, 0.5, 0.4, 0.5), mode=mode)
    nxt = env.step(np.full(4, k), np.array(a)).next_state
    assert nxt[0] == nxt[1]


@given(s=st.tuples(levels, levels, levels, levels), a=st.tuples(volts, volts))
def test_deterministic_and_penalty_gap(s, a):
    env = FourTankEnv()
    s, a = np.array(s), np.array(a)
    x, y = env.step(s, a), env.step(s, a)
    assert np.array_equal(x.next_state, y.next_state) and x.r_target == y.r_target
    clamped = env.clamp_action(a)
    ok_t, _ = env.rewards(clamped, np.full(4, 10.0))
    bad_t, bad_a = env.rewards(clamped, np.full(4, 40.0))
    assert bad_t - ok_t == pytest.approx(-100.0, abs=1e-12) and bad_a == -100.0
    assert x.r_assist in (0.0, -100.0) and x.terminated == (x.r_assist < 0)


@given(a=st.tuples(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6)))
def test_clamp_idempotent(a):
    env = FourTankEnv()
    once = env.clamp_action(a)
    assert np.array_equal(env.clamp_action(once), once)
    assert np.all((once >= 0) & (once <= 12))


def test_actor_output_mapping():
    env = FourTankEnv()
    assert np.array_equal(env.map_action(np.array([-1.0, 1.0])), [0.0, 12.0])
    assert np.array_equal(env.map_action(np.array([0.0, 5.0])), [6.0, 12.0])


def test_negative_levels_do_not_raise():
    env = FourTankEnv(mode="direct")
    step = env.step(np.array([3.0, 3.0, 3.0, 3.0]), np.zeros(2))
    assert np.all(np.isfinite(step.next_state)) and step.terminated


@pytest.mark.parametrize("mode,hold", [("incremental", 1.0), ("direct", 6.0)])
def test_defaults_admit_a_feasible_constant_policy(mode, hold):
    env = FourTankEnv(mode=mode)
    corners = [np.array(c, dtype=float) for c in itertools.product((3.0, 30.0), repeat=4)]
    for s in corners + [np.full(4, 16.5)]:
        for _ in range(env.spec.horizon):
            step = env.step(s, np.array([hold, hold]))
            assert not step.terminated
            s = step.next_state
