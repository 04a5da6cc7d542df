"""The hybrid encoder -> LSTM -> LIF -> Q-head network.

Parameters live in one flat ``dict`` of float64 arrays keyed by block name
(``"enc0.Wq"``, ``"lstm.W_f"``, ``"q.b"``, ...) so gradients, optimizers,
checkpoints and the gradient checker can all iterate over the same keys.
"""
import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .. import _rng
from ..exceptions import ArgumentError, FormatError, StateError
from .layers import (ffn_backward, ffn_forward, layer_norm_backward,
                     layer_norm_forward, mha_backward, mha_forward)
from .lstm import GATES, LstmParams, lstm_sequence, lstm_sequence_backward
from .spiking import LifParams, StdpParams, stdp_from_rasters

STDP_KEY = "lif.W_in"


@dataclass(frozen=True)
class HybridConfig:
    n_features: int
    n_actions: int
    tokens_per_trial: int = 8
    d_model: int = 32
    n_heads: int = 4
    n_layers: int = 2
    d_ff: int = 64
    hidden: int = 32
    n_neurons: int = 32
    max_seq: int = None
    lif: LifParams = field(default_factory=lambda: LifParams(dt_ms=5.0))
    stdp: StdpParams = field(default_factory=StdpParams)
    pre_spike_threshold: float = 0.25

    def __post_init__(self):
        if self.n_features % self.tokens_per_trial:
            raise ArgumentError(
                f"n_features {self.n_features} not divisible by "
                f"tokens_per_trial {self.tokens_per_trial}")
        if self.d_model % self.n_heads:
            raise ArgumentError("d_model must be divisible by n_heads")
        if self.max_seq is None:
            object.__setattr__(self, "max_seq", self.tokens_per_trial)

    @property
    def chunk(self):
        return self.n_features // self.tokens_per_trial

    def to_json(self):
        return asdict(self)

    @classmethod
    def from_json(cls, doc):
        doc = dict(doc)
        doc["lif"] = LifParams(**doc.get("lif", {}))
        doc["stdp"] = StdpParams(**doc.get("stdp", {}))
        return cls(**doc)


@dataclass
class HybridNetParams:
    config: HybridConfig
    params: dict
    seed: int = 0

    def copy(self):
        return replace(self, params={k: v.copy() for k, v in self.params.items()})

    def lstm(self):
        p = self.params
        return LstmParams(*(p[f"lstm.W_{g}"] for g in GATES),
                          *(p[f"lstm.b_{g}"] for g in GATES))

    def trainable_keys(self):
        """Blocks updated by backpropagation (all but the STDP synapses)."""
        return [k for k in self.params if k != STDP_KEY]


def _uniform(rng, shape, fan_in):
    bound = np.sqrt(1.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


def init_network(config, seed=0):
    """Seeded init: ``U(-sqrt(1/fan_in), +sqrt(1/fan_in))``, zero biases."""
    rng = _rng.stream(seed, "init")
    c = config
    d, H = c.d_model, c.hidden
    p = {"embed.W": _uniform(rng, (c.chunk, d), c.chunk),
         "embed.b": np.zeros(d),
         "embed.pos": _uniform(rng, (c.max_seq, d), d)}
    for l in range(c.n_layers):
        for name in ("Wq", "Wk", "Wv", "Wo"):
            p[f"enc{l}.{name}"] = _uniform(rng, (d, d), d)
        p[f"enc{l}.ln1.gamma"] = np.ones(d)
        p[f"enc{l}.ln1.beta"] = np.zeros(d)
        p[f"enc{l}.W1"] = _uniform(rng, (d, c.d_ff), d)
        p[f"enc{l}.b1"] = np.zeros(c.d_ff)
        p[f"enc{l}.W2"] = _uniform(rng, (c.d_ff, d), c.d_ff)
        p[f"enc{l}.b2"] = np.zeros(d)
        p[f"enc{l}.ln2.gamma"] = np.ones(d)
        p[f"enc{l}.ln2.beta"] = np.zeros(d)
    for g in GATES:
        p[f"lstm.W_{g}"] = _uniform(rng, (H, H + d), H + d)
        p[f"lstm.b_{g}"] = np.zeros(H)
    p[STDP_KEY] = _uniform(rng, (c.n_neurons, H), H)
    p["q.W"] = _uniform(rng, (c.n_actions, c.n_neurons), c.n_neurons)
    p["q.b"] = np.zeros(c.n_actions)
    return HybridNetParams(config, p, seed)


# --------------------------------------------------------------------------
# Forward
# --------------------------------------------------------------------------

def embed(features, W, b, pos, tokens_per_trial):
    """Chunk a feature vector into tokens, project, add learned positions."""
    features = np.asarray(features, dtype=np.float64).ravel()
    if features.size % tokens_per_trial:
        raise ArgumentError(f"{features.size} features cannot be split into "
                            f"{tokens_per_trial} tokens")
    chunks = features.reshape(tokens_per_trial, -1)
    if chunks.shape[1] != W.shape[0]:
        raise ArgumentError(f"chunk size {chunks.shape[1]} does not match "
                            f"projection input {W.shape[0]}")
    if tokens_per_trial > pos.shape[0]:
        raise ArgumentError("more tokens than positional encodings")
    return chunks @ W + b + pos[:tokens_per_trial]


def _encoder_layer(X, p, l, n_heads):
    attn, c_att = mha_forward(X, p[f"enc{l}.Wq"], p[f"enc{l}.Wk"],
                              p[f"enc{l}.Wv"], p[f"enc{l}.Wo"], n_heads)
    X1, c_ln1 = layer_norm_forward(X + attn, p[f"enc{l}.ln1.gamma"],
                                   p[f"enc{l}.ln1.beta"])
    F, c_ffn = ffn_forward(X1, p[f"enc{l}.W1"], p[f"enc{l}.b1"],
                           p[f"enc{l}.W2"], p[f"enc{l}.b2"])
    X2, c_ln2 = layer_norm_forward(X1 + F, p[f"enc{l}.ln2.gamma"],
                                   p[f"enc{l}.ln2.beta"])
    return X2, (c_att, c_ln1, c_ffn, c_ln2)


def encoder_forward(tokens, net, return_caches=False):
    """Post-norm residual blocks: ``LN(x + MHA(x))`` then ``LN(x + FFN(x))``."""
    c = net.config
    X = np.asarray(tokens, dtype=np.float64)
    if X.shape[0] > c.max_seq:
        raise ArgumentError(f"sequence length {X.shape[0]} exceeds max_seq "
                            f"{c.max_seq}")
    caches = []
    for l in range(c.n_layers):
        X, cache = _encoder_layer(X, net.params, l, c.n_heads)
        caches.append(cache)
    return (X, caches) if return_caches else X


def lif_sequence(W_in, hs, lif, pre_threshold):
    """Drive LIF neurons with ``I_t = W_in h_t``; V starts at ``v_reset``.

    Returns the membrane trace (steps+1, neurons) including the initial
    value, plus pre/post spike rasters for STDP.
    """
    V = np.full(W_in.shape[0], lif.v_reset)
    Vs = [V]
    post = []
    a = lif.dt_ms / lif.tau_ms
    for h in hs:
        V = V + a * (-V + lif.R * (W_in @ h))
        spk = V >= lif.v_thresh
        V = np.where(spk, lif.v_reset, V)
        Vs.append(V)
        post.append(spk)
    pre = np.asarray(hs) > pre_threshold
    return np.array(Vs), pre, np.array(post).reshape(len(hs), W_in.shape[0])


@dataclass
class ForwardTrace:
    features: np.ndarray
    chunks: np.ndarray
    encoder_caches: list
    encoded: np.ndarray
    lstm_caches: list
    hidden: np.ndarray
    membrane: np.ndarray
    pre_spikes: np.ndarray
    post_spikes: np.ndarray


def forward(net, features, mode="eval"):
    """Q-values for one feature vector.

    embed -> encoder -> one LSTM step per token -> one LIF step per LSTM
    output -> affine Q-head on the final membrane potentials.  Returns
    ``(q_values, trace)`` where ``trace`` is ``None`` in eval mode.
    """
    c, p = net.config, net.params
    features = np.asarray(features, dtype=np.float64).ravel()
    if features.size != c.n_features:
        raise ArgumentError(f"expected {c.n_features} features, got {features.size}")
    X0 = embed(features, p["embed.W"], p["embed.b"], p["embed.pos"],
               c.tokens_per_trial)
    enc, enc_caches = encoder_forward(X0, net, return_caches=True)
    hs, lstm_caches = lstm_sequence(net.lstm(), enc)
    Vs, pre, post = lif_sequence(p[STDP_KEY], hs, c.lif, c.pre_spike_threshold)
    q = p["q.W"] @ Vs[-1] + p["q.b"]
    if mode == "eval":
        return q, None
    if mode != "train":
        raise ArgumentError(f"mode must be 'train' or 'eval', not {mode!r}")
    trace = ForwardTrace(features, features.reshape(c.tokens_per_trial, -1),
                         enc_caches, enc, lstm_caches, hs, Vs, pre, post)
    return q, trace


def q_values(net, features):
    return forward(net, features, "eval")[0]


# --------------------------------------------------------------------------
# Backward
# --------------------------------------------------------------------------

def backward(net, trace, dq):
    """Reverse-mode gradients of all backprop-trained blocks.

    The LIF layer is crossed with a straight-through rule: the reset is
    ignored and the Euler recursion is differentiated as if no neuron had
    spiked (exact whenever no spike occurred).  ``lif.W_in`` receives no
    gradient; it is trained by STDP only.
    """
    if trace is None:
        raise StateError("backward needs the trace of a forward(mode='train') call")
    c, p = net.config, net.params
    dq = np.asarray(dq, dtype=np.float64)
    g = {}
    V_T = trace.membrane[-1]
    g["q.W"] = np.outer(dq, V_T)
    g["q.b"] = dq.copy()
    dV = p["q.W"].T @ dq

    a = c.lif.dt_ms / c.lif.tau_ms
    T = trace.hidden.shape[0]
    dhs = np.zeros_like(trace.hidden)
    W_in = p[STDP_KEY]
    for t in range(T - 1, -1, -1):
        dhs[t] = W_in.T @ (a * c.lif.R * dV)
        dV = (1.0 - a) * dV

    dX, lstm_g = lstm_sequence_backward(net.lstm(), dhs, trace.lstm_caches)
    for k, v in lstm_g.items():
        g[f"lstm.{k}"] = v

    for l in range(c.n_layers - 1, -1, -1):
        c_att, c_ln1, c_ffn, c_ln2 = trace.encoder_caches[l]
        dR2, g[f"enc{l}.ln2.gamma"], g[f"enc{l}.ln2.beta"] = \
            layer_norm_backward(dX, c_ln2)
        dX1, fg = ffn_backward(dR2, c_ffn)
        for k, v in fg.items():
            g[f"enc{l}.{k}"] = v
        dX1 = dX1 + dR2
        dR1, g[f"enc{l}.ln1.gamma"], g[f"enc{l}.ln1.beta"] = \
            layer_norm_backward(dX1, c_ln1)
        dX, ag = mha_backward(dR1, c_att)
        for k, v in ag.items():
            g[f"enc{l}.{k}"] = v
        dX = dX + dR1

    g["embed.W"] = trace.chunks.T @ dX
    g["embed.b"] = dX.sum(axis=0)
    dpos = np.zeros_like(p["embed.pos"])
    dpos[:c.tokens_per_trial] = dX
    g["embed.pos"] = dpos
    return g


def apply_stdp(net, trace):
    """Update the LIF input synapses in place from a trace's spike rasters."""
    c = net.config
    if trace.post_spikes.any() and trace.pre_spikes.any():
        net.params[STDP_KEY] = stdp_from_rasters(
            net.params[STDP_KEY], trace.pre_spikes, trace.post_spikes,
            c.lif.dt_ms, c.stdp)


# --------------------------------------------------------------------------
# Checkpoints
# --------------------------------------------------------------------------

def checkpoint_dict(net, extra=None):
    doc = {"config": net.config.to_json(), "seed": int(net.seed),
           "params": {k: {"shape": list(v.shape), "data": v.ravel().tolist()}
                      for k, v in net.params.items()}}
    if extra:
        doc.update(extra)
    return doc


def save_checkpoint(net, path, extra=None):
    with open(path, "w") as fh:
        json.dump(checkpoint_dict(net, extra), fh)
        fh.write("\n")


def load_checkpoint(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
        config = HybridConfig.from_json(doc["config"])
        params = {k: np.asarray(v["data"], dtype=np.float64).reshape(v["shape"])
                  for k, v in doc["params"].items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed checkpoint ({exc})") from None
    ref = init_network(config, 0).params
    for k, v in ref.items():
        if k not in params or params[k].shape != v.shape:
            raise FormatError(f"{path}: parameter {k!r} missing or mis-shaped")
    return HybridNetParams(config, params, int(doc.get("seed", 0)))
