"""Central finite-difference check of ``network.backward``."""
from dataclasses import dataclass

import numpy as np

from .. import _rng
from .network import backward, forward

TOLERANCE = 1e-4


@dataclass
class GradCheckReport:
    errors: dict           # block name -> relative error
    worst_block: str
    worst_error: float
    spikes: int            # LIF spikes in the probed forward pass
    passed: bool

    def __str__(self):
        status = "pass" if self.passed else "FAIL"
        return (f"grad_check {status}: worst {self.worst_block} "
                f"rel err {self.worst_error:.3e} (tol {TOLERANCE:g})")


def relative_error(analytic, numeric):
    """``||a - n|| / max(||a||, ||n||)``, zero when both vanish."""
    denom = max(np.linalg.norm(analytic), np.linalg.norm(numeric))
    if denom < 1e-12:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / denom)


def grad_check(net, features, seed=0, step=1e-5, keys=None, backward_fn=backward,
               tol=TOLERANCE):
    """Compare analytic and numerical gradients of ``L = c . q(features)``.

    ``c`` is a seeded random projection of the Q-values.  Every entry of
    every backprop-trained block is perturbed by ``+-step``.  The check is
    only meaningful when no LIF neuron spikes (the reported ``spikes``
    count should be zero).
    """
    rng = _rng.stream(seed, "gradcheck")
    c = rng.normal(size=net.config.n_actions)
    q, trace = forward(net, features, "train")
    analytic = backward_fn(net, trace, c)
    keys = keys or net.trainable_keys()
    errors = {}
    probe = net.copy()
    for k in keys:
        theta = probe.params[k]
        num = np.zeros_like(theta)
        flat, nflat = theta.reshape(-1), num.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = c @ forward(probe, features)[0]
            flat[i] = orig - step
            down = c @ forward(probe, features)[0]
            flat[i] = orig
            nflat[i] = (up - down) / (2 * step)
        errors[k] = relative_error(analytic[k], num)
    worst = max(errors, key=errors.get)
    spikes = int(trace.post_spikes.sum())
    return GradCheckReport(errors, worst, errors[worst], spikes,
                           errors[worst] <= tol)
