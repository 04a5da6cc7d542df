import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from neuroassist.exceptions import ArgumentError
from neuroassist.hybrid import LstmParams, LstmState, lstm_step
from neuroassist.hybrid.lstm import lstm_step_cached
import oracles


def zero_params(H, n):
    return LstmParams(*(np.zeros((H, H + n)) for _ in range(4)),
                      *(np.zeros(H) for _ in range(4)))


def random_params(rng, H, n, scale=1.0):
    return LstmParams(*(rng.normal(scale=scale, size=(H, H + n)) for _ in range(4)),
                      *(rng.normal(scale=scale, size=H) for _ in range(4)))


def naive_step(p, h, C, x):
    z = list(h) + list(x)

    def gate(W, b, act):
        return [act(sum(W[r][k] * z[k] for k in range(len(z))) + b[r]) for r in range(len(h))]

    f = gate(p.W_f, p.b_f, oracles.sigmoid)
    i = gate(p.W_i, p.b_i, oracles.sigmoid)
    ct = gate(p.W_C, p.b_C, math.tanh)
    o = gate(p.W_o, p.b_o, oracles.sigmoid)
    C2 = [f[r] * C[r] + i[r] * ct[r] for r in range(len(h))]
    return [o[r] * math.tanh(C2[r]) for r in range(len(h))], C2


class TestLstmStep:
    def test_zero_everything(self):
        s = lstm_step(zero_params(3, 2), LstmState.zeros(3), np.zeros(2))
        np.testing.assert_array_equal(s.C, 0.0)
        np.testing.assert_array_equal(s.h, 0.0)

    def test_zero_weights_halve_cell(self):
        C = np.array([0.4, -2.0, 3.0])
        s = lstm_step(zero_params(3, 2), LstmState(np.zeros(3), C), np.ones(2))
        np.testing.assert_allclose(s.C, 0.5 * C, atol=1e-15)
        np.testing.assert_allclose(s.h, 0.5 * np.tanh(0.5 * C), atol=1e-15)

    def test_gates_at_zero(self):
        _, cache = lstm_step_cached(zero_params(2, 1), LstmState.zeros(2), np.zeros(1))
        _, f, i, c_tilde, o, _, _ = cache
        for g in (f, i, o):
            np.testing.assert_array_equal(g, 0.5)
        np.testing.assert_array_equal(c_tilde, 0.0)

    def test_naive_oracle(self):
        rng = np.random.default_rng(0)
        p = random_params(rng, 4, 3)
        h, C, x = rng.normal(size=4), rng.normal(size=4), rng.normal(size=3)
        s = lstm_step(p, LstmState(h, C), x)
        h_ref, C_ref = naive_step(p, h, C, x)
        np.testing.assert_allclose(s.h, h_ref, atol=1e-12)
        np.testing.assert_allclose(s.C, C_ref, atol=1e-12)

    @given(st.integers(0, 10_000))
    def test_gate_range_and_cell_bound(self, seed):
        rng = np.random.default_rng(seed)
        p = random_params(rng, 3, 2, scale=2.0)
        C = rng.normal(scale=3.0, size=3)
        s, cache = lstm_step_cached(p, LstmState(rng.normal(size=3), C), rng.normal(size=2))
        _, f, i, _, o, _, _ = cache
        for g in (f, i, o):
            assert np.all((g > 0) & (g < 1))
        assert np.all(np.abs(s.C) <= f * np.abs(C) + i + 1e-12)
        assert np.all(np.abs(s.C) < np.abs(C) + 1.0)

    def test_cell_magnitude_can_grow_past_previous(self):
        # saturated forget/input gates with a saturated negative candidate
        p = zero_params(1, 1)
        p.b_f[:] = p.b_i[:] = 30.0
        p.b_C[:] = -30.0
        s = lstm_step(p, LstmState(np.zeros(1), np.array([-3.0])), np.zeros(1))
        assert s.C[0] == pytest.approx(-4.0, abs=1e-9)

    def test_shape_mismatch(self):
        with pytest.raises(ArgumentError):
            lstm_step(zero_params(3, 2), LstmState.zeros(3), np.zeros(4))
        with pytest.raises(ArgumentError):
            lstm_step(zero_params(3, 2), LstmState.zeros(2), np.zeros(2))
