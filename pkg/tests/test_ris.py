import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_channels, random_symbols
from oracles import heff_of, summed_margin
from slpris.channel import ChannelSet, PhaseConfig, effective_channel
from slpris.errors import InvalidArgument
from slpris.ris import margins, optimize_phases, phase_profile
from slpris.slp import QosTargets, solve_block

D1 = (1 + 1j) / np.sqrt(2)


def _toy():
    # zero direct link, unit cascade: y = e^{j theta} * x with x = 1
    return ChannelSet(np.zeros((1, 1)), np.ones((1, 1)), np.ones((1, 1)))


def test_margin_closed_form():
    ch = _toy()
    for t in np.linspace(0, 2 * np.pi, 13):
        z = margins(ch, PhaseConfig([t]), np.ones((1, 1)), [[D1]])
        assert z[0, 0] == pytest.approx(np.sqrt(2) * min(np.cos(t), np.sin(t)), abs=1e-12)
    assert margins(ch, PhaseConfig([np.pi / 4]), np.ones((1, 1)), [[D1]])[0, 0] == pytest.approx(1.0)


def test_margins_of_solved_precoder_meet_qos(rng):
    ch = random_channels(rng, 4, 3, 6)
    phase = PhaseConfig(rng.uniform(0, 2 * np.pi, 6))
    t = random_symbols(rng, 5, 3)
    s = np.array([0.3, 1.0, 2.0])
    X = solve_block(effective_channel(ch, phase), t, QosTargets(s))
    z = margins(ch, phase, X, t)
    assert z.shape == (5, 3)
    assert np.all(z >= s - 1e-8)


def test_margins_dimension_mismatch(rng):
    ch = random_channels(rng, 2, 2, 3)
    with pytest.raises(InvalidArgument):
        margins(ch, PhaseConfig.identity(3), np.ones((3, 4)), np.full((4, 2), D1))


def test_phase_profile_single_element(rng):
    ch = random_channels(rng, 3, 2, 1)
    X = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    a, b = phase_profile(ch, PhaseConfig([1.0]), X, k=1, l=0, n=0)
    assert a == pytest.approx(ch.direct[1] @ X[:, 0])
    assert b == pytest.approx(ch.ris_user[1, 0] * (ch.bs_ris[0] @ X[:, 0]))


def test_phase_profile_reconstruction(rng):
    ch = random_channels(rng, 3, 2, 5)
    phase = PhaseConfig(rng.uniform(0, 2 * np.pi, 5))
    X = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    for k in range(2):
        for l in range(4):
            for n in range(5):
                a, b = phase_profile(ch, phase, X, k, l, n)
                for t in (0.0, 1.3, 4.0):
                    th = phase.theta.copy()
                    th[n] = t
                    direct = effective_channel(ch, PhaseConfig(th))[k] @ X[:, l]
                    assert abs(a + b * np.exp(1j * t) - direct) <= 1e-12 * (1 + abs(direct))


def test_phase_profile_zero_cascade_is_flat(rng):
    ch = random_channels(rng, 2, 1, 2)
    ch = ChannelSet(ch.direct, ch.bs_ris, np.array([[0.0, 1.0]]))
    _, b = phase_profile(ch, PhaseConfig.identity(2), np.ones((2, 1)), 0, 0, 0)
    assert b == 0


def test_phase_profile_bounds(rng):
    ch = random_channels(rng, 2, 1, 2)
    with pytest.raises(InvalidArgument):
        phase_profile(ch, PhaseConfig.identity(2), np.ones((2, 1)), 0, 0, 2)


def test_optimize_closed_form_maximum():
    ch = _toy()
    out = optimize_phases(ch, np.ones((1, 1)), [[D1]], PhaseConfig([3.0]))
    assert out.theta[0] == pytest.approx(np.pi / 4, abs=2 * np.pi / 64)
    assert margins(ch, out, np.ones((1, 1)), [[D1]])[0, 0] == pytest.approx(1.0, abs=1e-9)


def test_optimize_keeps_phase_without_dependence(rng):
    ch = random_channels(rng, 2, 1, 1)
    ch = ChannelSet(ch.direct, ch.bs_ris, np.zeros((1, 1)))
    start = PhaseConfig([2.5])
    out = optimize_phases(ch, np.ones((2, 1)), [[D1]], start)
    np.testing.assert_array_equal(out.theta, start.theta)


def test_optimize_rejects_wrong_length(rng):
    ch = random_channels(rng, 2, 1, 3)
    with pytest.raises(InvalidArgument):
        optimize_phases(ch, np.ones((2, 1)), [[D1]], PhaseConfig.identity(2))


def test_two_element_grid_oracle(rng):
    for _ in range(3):
        ch = random_channels(rng, 2, 1, 2)
        X = rng.standard_normal((2, 1)) + 1j * rng.standard_normal((2, 1))
        t = random_symbols(rng, 1, 1)
        g = np.linspace(0, 2 * np.pi, 720, endpoint=False)
        T1, T2 = np.meshgrid(g, g, indexing="ij")
        e1 = np.exp(1j * T1)[..., None]
        e2 = np.exp(1j * T2)[..., None]
        # received sample as a function of both phases
        y = (ch.direct @ X)[0, 0] + e1 * (ch.ris_user[0, 0] * ch.bs_ris[0] @ X)[0] + \
            e2 * (ch.ris_user[0, 1] * ch.bs_ris[1] @ X)[0]
        oracle = np.max(np.minimum(y.real / t.real, y.imag / t.imag))
        best = optimize_phases(ch, X, t, PhaseConfig.identity(2))
        assert summed_margin(effective_channel(ch, best), X, t) >= oracle - 1e-3


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 6), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_ascent_trace_monotone_and_consistent(K, N, L, seed):
    rng = np.random.default_rng(seed)
    ch = random_channels(rng, 3, K, N)
    X = rng.standard_normal((3, L)) + 1j * rng.standard_normal((3, L))
    t = random_symbols(rng, L, K)
    start = PhaseConfig(rng.uniform(0, 2 * np.pi, N))
    out, trace = optimize_phases(ch, X, t, start, return_trace=True)
    assert np.all(np.diff(trace) >= 0)
    assert trace[0] == pytest.approx(summed_margin(effective_channel(ch, start), X, t), abs=1e-9)
    final = float(np.sum(margins(ch, out, X, t)))
    assert abs(trace[-1] - final) <= 1e-9 * (1 + abs(final))
    assert final == pytest.approx(summed_margin(heff_of(ch.direct, ch.ris_user, ch.bs_ris,
                                                        out.theta), X, t), abs=1e-9)


def test_objective_is_2pi_periodic(rng):
    ch = random_channels(rng, 2, 2, 3)
    X = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    t = random_symbols(rng, 2, 2)
    theta = rng.uniform(0, 2 * np.pi, 3)
    a = margins(ch, PhaseConfig(theta), X, t)
    b = margins(ch, PhaseConfig(theta + 2 * np.pi * np.array([1, -3, 7])), X, t)
    np.testing.assert_allclose(a, b, atol=1e-12)
