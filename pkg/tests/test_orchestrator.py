import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_channels, random_symbols
from slpris.channel import ChannelSet, PhaseConfig, effective_channel
from slpris.errors import BudgetExceeded, InfeasibleError
from slpris.orchestrator import alternate_block, rotation_combinations, rotation_search
from slpris.slp import QosTargets, SymbolBlock, rotate_symbols, solve_block, solve_symbol_precoder


def test_empty_ris_single_pass(rng):
    ch = random_channels(rng, 3, 2, 4).without_ris()
    block = SymbolBlock(random_symbols(rng, 3, 2), np.zeros(2))
    res = alternate_block(ch, block, PhaseConfig.identity(0), QosTargets.uniform(2, 1.0))
    assert res.iterations == 0 and res.converged
    assert res.theta.theta.size == 0
    assert res.power_trace == [res.power]
    assert res.power == pytest.approx(solve_block(ch.direct, block.data, QosTargets.uniform(2, 1.0)).total_power)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_alternation_safeguard(K, N, L, seed):
    rng = np.random.default_rng(seed)
    ch = random_channels(rng, 3, K, N)
    block = SymbolBlock(random_symbols(rng, L, K), np.zeros(K))
    qos = QosTargets.uniform(K, 1.0)
    theta0 = PhaseConfig(rng.uniform(0, 2 * np.pi, N))
    res = alternate_block(ch, block, theta0, qos)
    first = solve_block(effective_channel(ch, theta0), rotate_symbols(block), qos).total_power
    assert res.power_trace[0] == pytest.approx(first, rel=1e-12)
    assert np.all(np.diff(res.power_trace) <= 0)
    assert res.power_trace[-1] == res.power
    for tr in res.ascent_traces:
        assert np.all(np.diff(tr) >= 0)
    # returned state is self-consistent
    again = solve_block(effective_channel(ch, res.theta), rotate_symbols(block), qos)
    assert again.total_power == pytest.approx(res.power, rel=1e-9)


def test_single_element_grid_oracle():
    rng = np.random.default_rng(77)
    qos = QosTargets.uniform(1, 1.0)
    grid = np.linspace(0, 2 * np.pi, 720, endpoint=False)
    for _ in range(5):
        ch = random_channels(rng, 2, 1, 1)
        data = random_symbols(rng, 1, 1)
        oracle = min(solve_symbol_precoder(effective_channel(ch, PhaseConfig([t])), data[0], qos)[1]
                     for t in grid)
        res = alternate_block(ch, SymbolBlock(data, [0.0]), PhaseConfig.identity(1), qos)
        assert res.power <= oracle * (1 + 1e-3)


def test_combination_counts():
    assert len(rotation_combinations(1)) == 4
    combos = rotation_combinations(2)
    assert len(combos) == 16
    np.testing.assert_allclose(combos[0], [0, 0])
    np.testing.assert_allclose(combos[1], [0, np.pi / 2])
    np.testing.assert_allclose(combos[4], [np.pi / 2, 0])


def test_rotation_search_enumeration_oracle(rng):
    ch = random_channels(rng, 3, 2, 0)
    data = random_symbols(rng, 1, 2)
    qos = QosTargets.uniform(2, 1.0)
    res = rotation_search(ch, data, qos)
    direct = [solve_symbol_precoder(ch.direct, data[0] * np.exp(-1j * phi), qos)[1]
              for phi in rotation_combinations(2)]
    assert len(res.per_combo_power) == 16
    np.testing.assert_allclose(res.per_combo_power, direct, rtol=1e-12)
    assert res.power == pytest.approx(min(direct), rel=1e-12)
    assert res.best_index == int(np.argmin(direct))
    np.testing.assert_allclose(res.best_phi, rotation_combinations(2)[res.best_index])


def test_rotation_search_best_not_worse_than_zero(rng):
    ch = random_channels(rng, 3, 2, 3)
    data = random_symbols(rng, 2, 2)
    qos = QosTargets.uniform(2, 1.0)
    res = rotation_search(ch, data, qos)
    assert res.power == res.per_combo_power.min()
    assert res.power <= res.per_combo_power[0]
    zero = alternate_block(ch, SymbolBlock(data, np.zeros(2)), PhaseConfig.identity(3), qos)
    assert res.per_combo_power[0] == zero.power


def test_ties_go_to_first_combination():
    # a single user with a real-positive channel: the four quarter-turns are equivalent
    ch = ChannelSet(np.array([[1.0]]), np.zeros((0, 1)), np.zeros((1, 0)))
    res = rotation_search(ch, [[(1 + 1j) / np.sqrt(2)]], QosTargets.uniform(1, 1.0))
    np.testing.assert_allclose(res.per_combo_power, 1.0)
    assert res.best_index == 0
    np.testing.assert_array_equal(res.best_phi, [0.0])


def test_identical_users_infeasible_message_names_rotation():
    h = np.ones((2, 2))
    ch = ChannelSet(h, np.zeros((0, 2)), np.zeros((2, 0)))
    d = (1 + 1j) / np.sqrt(2)
    block = SymbolBlock([[d, -d]], [0.0, 0.0])
    with pytest.raises(InfeasibleError, match="rotation"):
        alternate_block(ch, block, PhaseConfig.identity(0), QosTargets.uniform(2, 1.0))


def test_infeasible_combination_propagates():
    # the all-zero combination is infeasible, and the search does not mask it
    h = np.ones((2, 2))
    ch = ChannelSet(h, np.zeros((0, 2)), np.zeros((2, 0)))
    d = (1 + 1j) / np.sqrt(2)
    with pytest.raises(InfeasibleError):
        rotation_search(ch, [[d, -d]], QosTargets.uniform(2, 1.0))


def test_user_cap():
    ch = random_channels(np.random.default_rng(0), 9, 9, 0)
    with pytest.raises(BudgetExceeded, match="K = 8"):
        rotation_search(ch, np.full((1, 9), (1 + 1j) / np.sqrt(2)), QosTargets.uniform(9, 1.0))


def test_identical_slots_give_identical_columns(rng):
    ch = random_channels(rng, 3, 2, 4)
    row = random_symbols(rng, 1, 2)
    res = alternate_block(ch, SymbolBlock(np.repeat(row, 4, axis=0), np.zeros(2)),
                          PhaseConfig.identity(4), QosTargets.uniform(2, 1.0))
    x = res.X.x
    for l in range(1, 4):
        np.testing.assert_allclose(x[:, l], x[:, 0], atol=1e-10)


def test_deterministic(rng):
    ch = random_channels(rng, 3, 2, 3)
    data = random_symbols(rng, 2, 2)
    qos = QosTargets.uniform(2, 1.0)
    a = rotation_search(ch, data, qos)
    b = rotation_search(ch, data, qos)
    np.testing.assert_array_equal(a.per_combo_power, b.per_combo_power)
    np.testing.assert_array_equal(a.best.theta.theta, b.best.theta.theta)


def test_shared_common_rotation_matches_full_enumeration(rng):
    ch = random_channels(rng, 3, 2, 3)
    data = random_symbols(rng, 2, 2)
    qos = QosTargets.uniform(2, 1.0)
    fast = rotation_search(ch, data, qos)
    full = rotation_search(ch, data, qos, share_common_rotation=False)
    # equal in exact arithmetic; the phase search resolves phases to 1e-6 rad
    np.testing.assert_allclose(fast.per_combo_power, full.per_combo_power, rtol=1e-3)
    assert fast.power == pytest.approx(full.power, rel=1e-3)
    np.testing.assert_array_equal(fast.best_phi[0], 0.0)
