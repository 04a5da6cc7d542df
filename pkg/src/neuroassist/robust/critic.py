"""Robust linear TD critic and the diagnostics built around it.

The critic approximates the robust value of a fixed policy by ``V_w = Psi w``
and runs temporal-difference updates along a single trajectory of the
nominal chain, bootstrapping through the worst-case backup.  Diagnostics
(the projected robust Bellman error and an empirical contraction factor)
are computed exactly from the tabular model.
"""
import bisect
from dataclasses import dataclass, field

import numpy as np

from .. import _rng
from ..exceptions import ArgumentError, NumericError
from .mdp import (check_policy, robust_bellman, sampled_worst_case,
                  stationary_distribution)


@dataclass
class LinearFeatures:
    """Value features ``psi`` (S x d) and policy features ``phi`` (S*A x d')."""
    psi: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=np.float64)
        self.phi = np.asarray(self.phi, dtype=np.float64)
        if self.psi.ndim != 2 or self.phi.ndim != 2:
            raise ArgumentError("features must be 2D matrices")
        if not (np.all(np.isfinite(self.psi)) and np.all(np.isfinite(self.phi))):
            raise ArgumentError("features must be finite")

    @property
    def d(self):
        return self.psi.shape[1]

    @property
    def d_policy(self):
        return self.phi.shape[1]

    def check(self, mdp):
        if self.psi.shape[0] != mdp.n_states:
            raise ArgumentError(f"psi has {self.psi.shape[0]} rows, MDP has "
                                f"{mdp.n_states} states")
        if self.phi.shape[0] != mdp.n_states * mdp.n_actions:
            raise ArgumentError("phi needs one row per (state, action) pair")
        return self


def tabular_features(mdp):
    """One-hot value features per state and policy features per (s, a)."""
    return LinearFeatures(np.eye(mdp.n_states), np.eye(mdp.n_states * mdp.n_actions))


@dataclass(frozen=True)
class StepRule:
    """``alpha_k = a / (k + b)``."""
    a: float = 40.0
    b: float = 400.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ArgumentError("step rule constants must be positive")

    def __call__(self, k):
        return self.a / (k + self.b)


@dataclass
class CriticState:
    w: np.ndarray
    k: int = 0
    rule: StepRule = field(default_factory=StepRule)


def rltd(pi, mdp, uset, features, K, rule=StepRule(), seed=0, w0=None):
    """Robust linear TD along one nominal trajectory of length ``K``.

    Per step, with ``V = Psi w``:
    ``w += alpha_k psi(s) (r(s, a) + gamma * wc(s', V) - psi(s).w)`` where
    ``wc`` is the one-sample worst-case backup at the sampled next state.
    """
    pi = check_policy(pi, mdp)
    features.check(mdp)
    K = int(K)
    if K < 0:
        raise ArgumentError("K must be non-negative")
    psi = features.psi
    w = np.zeros(features.d) if w0 is None else np.array(w0, dtype=np.float64)
    rng = _rng.stream(seed, "rltd")
    nA, nS = mdp.n_actions, mdp.n_states
    pi_cdf = np.cumsum(pi, axis=1).tolist()
    p_cdf = np.cumsum(mdp.kernel, axis=2).tolist()
    u = rng.random((K + 1, 2)).tolist()
    s = min(bisect.bisect_right(np.cumsum(mdp.rho).tolist(), rng.random()), nS - 1)
    g = mdp.gamma
    rewards = mdp.reward.tolist()
    tabular = features.d == nS and np.array_equal(psi, np.eye(nS))
    for k in range(K):
        uk = u[k]
        a = min(bisect.bisect_right(pi_cdf[s], uk[0]), nA - 1)
        s2 = min(bisect.bisect_right(p_cdf[s][a], uk[1]), nS - 1)
        if uset.delta > 0:
            boot = sampled_worst_case(s2, w if tabular else psi @ w, uset)
        elif tabular:
            boot = w[s2]
        else:
            boot = float(psi[s2] @ w)
        alpha = rule.a / (k + rule.b)
        if tabular:
            w[s] += alpha * (rewards[s][a] + g * boot - w[s])
        else:
            w += alpha * (rewards[s][a] + g * boot - float(psi[s] @ w)) * psi[s]
        s = s2
    if not np.all(np.isfinite(w)):
        raise NumericError("RLTD iterate diverged")
    return CriticState(w, K, rule)


def _projection(psi, nu):
    D = np.diag(nu)
    G = psi.T @ D @ psi
    if np.linalg.cond(G) > 1e12:
        raise NumericError("Psi^T D Psi is singular; features are not identifiable "
                           "under the stationary distribution")
    return psi @ np.linalg.solve(G, psi.T @ D)


def stationary_of(pi, mdp):
    return stationary_distribution(mdp.policy_kernel(check_policy(pi, mdp)))


def mspbre(w, pi, mdp, uset, features):
    """``|| Pi (T V_w) - V_w ||^2_nu`` with ``nu`` the stationary distribution."""
    features.check(mdp)
    nu = stationary_of(pi, mdp)
    Pi = _projection(features.psi, nu)
    V = features.psi @ np.asarray(w, dtype=np.float64)
    diff = Pi @ robust_bellman(V, mdp, uset, pi) - V
    return float(np.sum(nu * diff * diff))


@dataclass
class ContractionReport:
    factor: float
    variant: str
    delta: float
    prop2_threshold: float     # contamination bound (1 - gamma) / (2 gamma)
    lemma1_threshold: float    # IPM bound lambda_min(Psi^T D Psi) (1 - gamma) / gamma
    below_threshold: bool

    @property
    def contracts(self):
        return self.factor < 1.0


def contraction_check(mdp, uset, features, pi, n_probes=64, seed=0):
    """Largest observed ``nu``-norm Lipschitz ratio of ``Pi T^pi`` over random pairs.

    The threshold the variant's sufficient condition compares ``delta``
    against is reported alongside; the factor is an estimate (a lower bound
    on the true modulus), not a proof.
    """
    features.check(mdp)
    pi = check_policy(pi, mdp)
    nu = stationary_of(pi, mdp)
    Pi = _projection(features.psi, nu)
    rng = _rng.stream(seed, "contraction-probes")
    g = mdp.gamma

    def norm(x):
        return float(np.sqrt(np.sum(nu * x * x)))

    factor = 0.0
    S = mdp.n_states
    for i in range(int(n_probes)):
        V = rng.normal(scale=5.0, size=S)
        if i % 2:
            # perturb a single coordinate: the pattern that moves min/span most
            dV = np.zeros(S)
            dV[rng.integers(S)] = rng.normal(scale=5.0)
        else:
            dV = rng.normal(size=S)
        V2 = V + dV
        num = norm(Pi @ (robust_bellman(V, mdp, uset, pi) - robust_bellman(V2, mdp, uset, pi)))
        den = norm(V - V2)
        if den > 0:
            factor = max(factor, num / den)
    lam = float(np.linalg.eigvalsh(features.psi.T @ np.diag(nu) @ features.psi).min())
    prop2 = (1 - g) / (2 * g) if g > 0 else np.inf
    lemma1 = lam * (1 - g) / g if g > 0 else np.inf
    bound = prop2 if uset.variant == "contamination" else lemma1
    return ContractionReport(factor, uset.variant, uset.delta, prop2, lemma1,
                             uset.delta < bound)
