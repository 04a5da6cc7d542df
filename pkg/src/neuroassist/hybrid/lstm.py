"""LSTM cell with the gate layout ``W_* : hidden x (hidden + input)``."""
from dataclasses import dataclass

import numpy as np

from ..exceptions import ArgumentError

GATES = ("f", "i", "C", "o")


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


@dataclass
class LstmParams:
    W_f: np.ndarray
    W_i: np.ndarray
    W_C: np.ndarray
    W_o: np.ndarray
    b_f: np.ndarray
    b_i: np.ndarray
    b_C: np.ndarray
    b_o: np.ndarray

    @property
    def hidden(self):
        return self.W_f.shape[0]

    @property
    def n_inputs(self):
        return self.W_f.shape[1] - self.W_f.shape[0]


@dataclass
class LstmState:
    h: np.ndarray
    C: np.ndarray

    @classmethod
    def zeros(cls, hidden):
        return cls(np.zeros(hidden), np.zeros(hidden))


def lstm_step(p, s, x):
    """One step: forget/input/output gates, candidate, cell and hidden update."""
    return lstm_step_cached(p, s, x)[0]


def lstm_step_cached(p, s, x):
    x = np.asarray(x, dtype=np.float64)
    H = p.hidden
    if s.h.shape != (H,) or s.C.shape != (H,) or x.shape != (p.n_inputs,):
        raise ArgumentError(
            f"lstm_step shapes: h {s.h.shape}, C {s.C.shape}, x {x.shape}; "
            f"expected hidden={H}, input={p.n_inputs}")
    z = np.concatenate([s.h, x])
    f = sigmoid(p.W_f @ z + p.b_f)
    i = sigmoid(p.W_i @ z + p.b_i)
    c_tilde = np.tanh(p.W_C @ z + p.b_C)
    C = f * s.C + i * c_tilde
    o = sigmoid(p.W_o @ z + p.b_o)
    tanh_c = np.tanh(C)
    h = o * tanh_c
    cache = (z, f, i, c_tilde, o, s.C, tanh_c)
    return LstmState(h, C), cache


def lstm_sequence(p, xs, state=None):
    """Run the cell over the rows of ``xs``; returns hidden states and caches."""
    state = state or LstmState.zeros(p.hidden)
    hs, caches = [], []
    for x in xs:
        state, cache = lstm_step_cached(p, state, x)
        hs.append(state.h)
        caches.append(cache)
    return np.array(hs), caches


def lstm_sequence_backward(p, dhs, caches):
    """Backpropagation through time.

    ``dhs[t]`` is the external gradient on ``h_t``.  Returns the input
    gradients (one row per step) and a dict of parameter gradients.
    """
    H = p.hidden
    grads = {f"W_{g}": np.zeros_like(getattr(p, f"W_{g}")) for g in GATES}
    grads.update({f"b_{g}": np.zeros(H) for g in GATES})
    dxs = np.zeros((len(caches), p.n_inputs))
    dh_next = np.zeros(H)
    dC_next = np.zeros(H)
    for t in range(len(caches) - 1, -1, -1):
        z, f, i, c_tilde, o, C_prev, tanh_c = caches[t]
        dh = dhs[t] + dh_next
        do = dh * tanh_c
        dC = dC_next + dh * o * (1.0 - tanh_c ** 2)
        pre = {"f": dC * C_prev * f * (1.0 - f),
               "i": dC * c_tilde * i * (1.0 - i),
               "C": dC * i * (1.0 - c_tilde ** 2),
               "o": do * o * (1.0 - o)}
        dz = np.zeros_like(z)
        for g in GATES:
            grads[f"W_{g}"] += np.outer(pre[g], z)
            grads[f"b_{g}"] += pre[g]
            dz += getattr(p, f"W_{g}").T @ pre[g]
        dh_next = dz[:H]
        dxs[t] = dz[H:]
        dC_next = dC * f
    return dxs, grads
