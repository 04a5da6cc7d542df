"""Log-linear policies and the robust Q-NPG actor update.

Natural policy gradient for a log-linear policy is carried out through the
compatible function approximation: regress the robust Q-function of the
critic onto the policy features and move ``theta`` along the regression
weights.  The Fisher preconditioner is never formed.
"""
from dataclasses import dataclass, field

import numpy as np

from .. import _rng
from ..exceptions import ArgumentError
from .mdp import robust_q


def policy_probs(theta, features, mdp):
    """``pi(a|s) = exp(phi(s,a).theta) / sum_b exp(phi(s,b).theta)``."""
    logits = (features.phi @ theta).reshape(mdp.n_states, mdp.n_actions)
    logits = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    return e / e.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class RegressionRule:
    """``zeta_n = min(cap, a / (n + b))``; ``cap`` defaults to ``1 / max||phi||^2``."""
    a: float = 20.0
    b: float = 20.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ArgumentError("regression rule constants must be positive")


@dataclass
class ActorState:
    theta: np.ndarray
    t: int = 0
    u: np.ndarray = None
    rule: RegressionRule = field(default_factory=RegressionRule)

    @classmethod
    def uniform(cls, features, rule=RegressionRule()):
        return cls(np.zeros(features.d_policy), 0, None, rule)


def sample_occupancy(pi, mdp, n, rng):
    """Draw ``n`` (s, a) pairs from the nominal discounted occupancy.

    Each rollout starts at ``rho`` and stops with probability ``1 - gamma``
    before every transition; the pair current at the stop is emitted.  All
    rollouts advance together, one vectorized transition per step.
    """
    nS, nA = mdp.n_states, mdp.n_actions
    pi_cdf = np.cumsum(pi, axis=1)
    p_cdf = np.cumsum(mdp.kernel, axis=2)

    def draw(cdf_rows):
        u = rng.random(cdf_rows.shape[0])[:, None]
        return np.minimum((u >= cdf_rows).sum(axis=1), cdf_rows.shape[1] - 1)

    s = draw(np.broadcast_to(np.cumsum(mdp.rho), (n, nS)))
    a = draw(pi_cdf[s])
    # number of transitions before stopping: Geometric(1 - gamma) - 1
    hops = (rng.geometric(1.0 - mdp.gamma, size=n) - 1 if mdp.gamma > 0
            else np.zeros(n, dtype=int))
    for step in range(int(hops.max(initial=0))):
        live = hops > step
        idx = np.flatnonzero(live)
        s[idx] = draw(p_cdf[s[idx], a[idx]])
        a[idx] = draw(pi_cdf[s[idx]])
    return np.stack([s, a], axis=1)


def critic_q(w, mdp, uset, features):
    """``Q_w(s, a) = r(s, a) + gamma * worst_case_value(p0[s, a], Psi w)``."""
    return robust_q(mdp, features.psi @ np.asarray(w, dtype=np.float64), uset)


def rqnpg(actor, w, mdp, uset, features, N, eta, seed=0, q_override=None, exact=False):
    """One robust Q-NPG step.

    Samples ``N`` state-action pairs from the discounted occupancy of the
    current policy, fits ``u`` to the critic's robust Q-values by
    stochastic least squares, and returns a new state with
    ``theta + eta * u``.  ``exact=True`` replaces the sampled regression
    with a least-squares solve over all pairs; ``q_override`` substitutes
    an (S, A) Q-table for the critic.
    """
    features.check(mdp)
    d = features.d_policy
    if int(N) < d and not exact:
        raise ArgumentError(f"N={N} is smaller than the policy feature dimension {d}")
    if eta < 0:
        raise ArgumentError("eta must be non-negative")
    Q = (np.asarray(q_override, dtype=np.float64) if q_override is not None
         else critic_q(w, mdp, uset, features))
    phi = features.phi
    if exact:
        u = np.linalg.lstsq(phi, Q.reshape(-1), rcond=None)[0]
    else:
        rng = _rng.stream(seed, "rqnpg")
        pi = policy_probs(actor.theta, features, mdp)
        pairs = sample_occupancy(pi, mdp, int(N), rng)
        cap = 1.0 / float(np.max(np.sum(phi * phi, axis=1)))
        rule = actor.rule
        u = np.zeros(d)
        nA = mdp.n_actions
        for n, (s, a) in enumerate(pairs):
            f = phi[s * nA + a]
            zeta = min(cap, rule.a / (n + rule.b))
            u += zeta * (Q[s, a] - float(f @ u)) * f
    return ActorState(actor.theta + eta * u, actor.t + 1, u, actor.rule)
