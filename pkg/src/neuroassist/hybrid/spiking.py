"""Leaky integrate-and-fire neurons and pair-based STDP."""
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..exceptions import ArgumentError


@dataclass(frozen=True)
class LifParams:
    tau_ms: float = 20.0
    R: float = 1.0
    v_thresh: float = 1.0
    v_reset: float = 0.0
    dt_ms: float = 1.0

    def __post_init__(self):
        if not self.tau_ms > 0:
            raise ArgumentError("tau_ms must be positive")
        if not self.dt_ms > 0:
            raise ArgumentError("dt_ms must be positive")
        if not self.v_reset < self.v_thresh:
            raise ArgumentError("v_reset must be below v_thresh")


@dataclass
class LifState:
    """Membrane potentials plus the spike bookkeeping STDP needs.

    Spike times are in ms; ``-inf`` means "never spiked".
    """
    V: np.ndarray
    t_ms: float = 0.0
    last_pre_spike_ms: np.ndarray = None
    last_post_spike_ms: np.ndarray = field(default=None)

    def __post_init__(self):
        self.V = np.asarray(self.V, dtype=np.float64)
        if self.last_post_spike_ms is None:
            self.last_post_spike_ms = np.full(self.V.shape, -np.inf)

    @classmethod
    def resting(cls, n_neurons, params, n_inputs=0):
        return cls(np.full(n_neurons, params.v_reset), 0.0,
                   np.full(n_inputs, -np.inf), np.full(n_neurons, -np.inf))


def lif_step(p, s, input_current, dt_ms=None, pre_spikes=None):
    """Explicit-Euler membrane update followed by threshold-and-reset.

    ``V <- V + dt (-V + R I) / tau``; neurons with ``V >= v_thresh`` spike
    and return to ``v_reset``.  Returns ``(new_state, spikes)``.
    """
    dt = p.dt_ms if dt_ms is None else dt_ms
    if not dt > 0:
        raise ArgumentError("dt_ms must be positive")
    I = np.asarray(input_current, dtype=np.float64)
    V = s.V + dt * (-s.V + p.R * I) / p.tau_ms
    spikes = V >= p.v_thresh
    V = np.where(spikes, p.v_reset, V)
    t = s.t_ms + dt
    last_post = np.where(spikes, t, s.last_post_spike_ms)
    last_pre = s.last_pre_spike_ms
    if pre_spikes is not None:
        base = last_pre if last_pre is not None else np.full(len(pre_spikes), -np.inf)
        last_pre = np.where(pre_spikes, t, base)
    return replace(s, V=V, t_ms=t, last_pre_spike_ms=last_pre,
                   last_post_spike_ms=last_post), spikes


@dataclass(frozen=True)
class StdpParams:
    a_plus: float = 0.01
    a_minus: float = 0.012
    tau_plus_ms: float = 20.0
    tau_minus_ms: float = 20.0
    w_min: float = -1.0
    w_max: float = 1.0

    def __post_init__(self):
        if min(self.a_plus, self.a_minus, self.tau_plus_ms, self.tau_minus_ms) <= 0:
            raise ArgumentError("STDP rates and time constants must be positive")
        if not self.w_min < self.w_max:
            raise ArgumentError("w_min must be below w_max")


def stdp_delta(dt_ms, p):
    """Weight change for ``dt = t_post - t_pre``; zero when ``dt == 0``."""
    if dt_ms > 0:
        return p.a_plus * math.exp(-dt_ms / p.tau_plus_ms)
    if dt_ms < 0:
        return -p.a_minus * math.exp(dt_ms / p.tau_minus_ms)
    return 0.0


def stdp_update(w, dt_ms, p):
    """Apply one STDP pairing to weight ``w`` and clamp to ``[w_min, w_max]``."""
    return min(max(w + stdp_delta(dt_ms, p), p.w_min), p.w_max)


def stdp_from_rasters(W, pre, post, dt_ms, p):
    """Nearest-spike STDP over a simulated window.

    ``pre`` is (steps, n_inputs) and ``post`` is (steps, n_neurons), both
    boolean.  At each step presynaptic spikes are handled first (depression
    against the latest earlier postsynaptic spike), then postsynaptic spikes
    (potentiation against the latest presynaptic spike, same-step pairs
    giving ``dt = 0``).  Returns the updated copy of ``W``.
    """
    W = np.array(W, dtype=np.float64)
    pre = np.asarray(pre, dtype=bool)
    post = np.asarray(post, dtype=bool)
    last_pre = np.full(W.shape[1], -np.inf)
    last_post = np.full(W.shape[0], -np.inf)
    for step in range(pre.shape[0]):
        t = (step + 1) * dt_ms
        for j in np.flatnonzero(pre[step]):
            for i in np.flatnonzero(np.isfinite(last_post)):
                W[i, j] = stdp_update(W[i, j], last_post[i] - t, p)
            last_pre[j] = t
        for i in np.flatnonzero(post[step]):
            for j in np.flatnonzero(np.isfinite(last_pre)):
                W[i, j] = stdp_update(W[i, j], t - last_pre[j], p)
            last_post[i] = t
    return W
