"""Tabular robust MDPs, uncertainty sets and exact robust dynamic programming.

Two (s, a)-rectangular uncertainty sets are supported:

* ``contamination``: ``{(1 - d) p0 + d q : q any distribution}``, whose
  worst case is ``(1 - d) p0.V + d min(V)``.
* ``ipm``: a span-regularized nominal backup ``p0.V - d (max V - min V) / 2``.
"""
import json
from dataclasses import dataclass

import numpy as np

from ..exceptions import ArgumentError, FormatError


@dataclass(frozen=True)
class UncertaintySet:
    variant: str = "contamination"
    delta: float = 0.0

    def __post_init__(self):
        if self.variant not in ("contamination", "ipm"):
            raise ArgumentError(f"unknown uncertainty set {self.variant!r}")
        if self.delta < 0:
            raise ArgumentError("delta must be non-negative")
        if self.variant == "contamination" and self.delta > 1:
            raise ArgumentError("contamination delta must be <= 1")


NOMINAL = UncertaintySet("contamination", 0.0)


@dataclass
class RobustMdp:
    kernel: np.ndarray     # (S, A, S) nominal transition probabilities
    reward: np.ndarray     # (S, A)
    gamma: float
    rho: np.ndarray        # (S,) start distribution

    def __post_init__(self):
        self.kernel = np.asarray(self.kernel, dtype=np.float64)
        self.reward = np.asarray(self.reward, dtype=np.float64)
        self.rho = np.asarray(self.rho, dtype=np.float64)
        S, A, S2 = self.kernel.shape
        if S != S2 or self.reward.shape != (S, A) or self.rho.shape != (S,):
            raise ArgumentError("inconsistent MDP shapes")
        if np.any(self.kernel < 0) or not np.allclose(self.kernel.sum(-1), 1.0,
                                                       rtol=0, atol=1e-12):
            raise ArgumentError("every kernel row must be a probability vector")
        if np.any(self.rho < 0) or abs(self.rho.sum() - 1.0) > 1e-12:
            raise ArgumentError("rho must be a probability vector")
        if not 0 <= self.gamma < 1:
            raise ArgumentError("gamma must lie in [0, 1)")

    @property
    def n_states(self):
        return self.kernel.shape[0]

    @property
    def n_actions(self):
        return self.kernel.shape[1]

    def policy_kernel(self, pi):
        """Nominal state-to-state matrix under ``pi``."""
        return np.einsum("sa,sat->st", pi, self.kernel)

    def policy_reward(self, pi):
        return np.sum(pi * self.reward, axis=1)

    def to_json(self):
        return {"n_states": self.n_states, "n_actions": self.n_actions,
                "kernel": self.kernel.tolist(), "reward": self.reward.tolist(),
                "gamma": self.gamma, "rho": self.rho.tolist()}


def load_fixture(path):
    """Read an MDP fixture ``{n_states, n_actions, kernel, reward, gamma, rho}``."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    return mdp_from_json(doc, path)


def mdp_from_json(doc, source="fixture"):
    keys = {"n_states", "n_actions", "kernel", "reward", "gamma", "rho"}
    if not isinstance(doc, dict) or set(doc) != keys:
        raise FormatError(f"{source}: expected exactly the keys {sorted(keys)}")
    try:
        mdp = RobustMdp(doc["kernel"], doc["reward"], float(doc["gamma"]), doc["rho"])
    except (ArgumentError, ValueError, TypeError) as exc:
        raise FormatError(f"{source}: {exc}") from None
    if (mdp.n_states, mdp.n_actions) != (doc["n_states"], doc["n_actions"]):
        raise FormatError(f"{source}: declared sizes disagree with arrays")
    return mdp


def check_policy(pi, mdp):
    pi = np.asarray(pi, dtype=np.float64)
    if pi.shape != (mdp.n_states, mdp.n_actions) or np.any(pi < 0) \
            or not np.allclose(pi.sum(axis=1), 1.0, rtol=0, atol=1e-9):
        raise ArgumentError("policy must be an (S, A) row-stochastic matrix")
    return pi


def uniform_policy(mdp):
    return np.full((mdp.n_states, mdp.n_actions), 1.0 / mdp.n_actions)


def worst_case_value(p_row, V, uset):
    """``inf_{p in P(p_row)} p.V`` for one nominal row."""
    V = np.asarray(V, dtype=np.float64)
    nominal = float(np.dot(p_row, V))
    if uset.delta == 0:
        return nominal
    if uset.variant == "contamination":
        return (1.0 - uset.delta) * nominal + uset.delta * float(V.min())
    return nominal - uset.delta * float(V.max() - V.min()) / 2.0


def worst_case_values(mdp, V, uset):
    """Vectorized worst case for every (s, a); shape (S, A)."""
    V = np.asarray(V, dtype=np.float64)
    nominal = mdp.kernel @ V
    if uset.delta == 0:
        return nominal
    if uset.variant == "contamination":
        return (1.0 - uset.delta) * nominal + uset.delta * V.min()
    return nominal - uset.delta * (V.max() - V.min()) / 2.0


def sampled_worst_case(next_state, V, uset):
    """Unbiased one-sample estimate of ``worst_case_value`` from ``s' ~ p0``."""
    v = float(V[next_state])
    if uset.delta == 0:
        return v
    if uset.variant == "contamination":
        return (1.0 - uset.delta) * v + uset.delta * float(np.min(V))
    return v - uset.delta * float(np.max(V) - np.min(V)) / 2.0


def robust_q(mdp, V, uset):
    """``r(s, a) + gamma * worst_case_value(p0[s, a], V)``."""
    return mdp.reward + mdp.gamma * worst_case_values(mdp, V, uset)


def robust_bellman(V, mdp, uset, pi):
    """Policy robust Bellman operator applied to ``V``."""
    pi = check_policy(pi, mdp)
    return np.sum(pi * robust_q(mdp, V, uset), axis=1)


def robust_policy_evaluation(mdp, uset, pi, tol=1e-10, max_iter=100_000):
    """Fixed point of ``robust_bellman`` (a sup-norm gamma-contraction)."""
    pi = check_policy(pi, mdp)
    V = np.zeros(mdp.n_states)
    for _ in range(max_iter):
        new = np.sum(pi * robust_q(mdp, V, uset), axis=1)
        if np.max(np.abs(new - V)) <= tol * (1 - mdp.gamma):
            return new
        V = new
    return V


def robust_value_iteration(mdp, uset, tol=1e-10, max_iter=100_000,
                           return_residuals=False):
    """Optimal robust values ``V*`` to within ``tol`` in sup norm.

    Stops once the Bellman residual ``r`` satisfies
    ``r * gamma / (1 - gamma) <= tol``.
    """
    if not tol > 0:
        raise ArgumentError("tol must be positive")
    V = np.zeros(mdp.n_states)
    residuals = []
    g = mdp.gamma
    for _ in range(max_iter):
        new = robust_q(mdp, V, uset).max(axis=1)
        res = float(np.max(np.abs(new - V)))
        residuals.append(res)
        V = new
        if res * g <= tol * (1 - g) or res == 0:
            break
    return (V, residuals) if return_residuals else V


def greedy_policy(mdp, V, uset):
    Q = robust_q(mdp, V, uset)
    pi = np.zeros_like(Q)
    pi[np.arange(mdp.n_states), np.argmax(Q, axis=1)] = 1.0
    return pi


def stationary_distribution(P):
    """Stationary distribution of an irreducible row-stochastic matrix."""
    S = P.shape[0]
    A = np.vstack([P.T - np.eye(S), np.ones(S)])
    b = np.zeros(S + 1)
    b[-1] = 1.0
    nu = np.linalg.lstsq(A, b, rcond=None)[0]
    nu = np.clip(nu, 0.0, None)
    return nu / nu.sum()


def policy_value(mdp, pi):
    """Nominal ``V^pi = (I - gamma P_pi)^{-1} r_pi`` by direct solve."""
    P = mdp.policy_kernel(pi)
    return np.linalg.solve(np.eye(mdp.n_states) - mdp.gamma * P, mdp.policy_reward(pi))


def bundled_fixture_path():
    from importlib import resources
    return str(resources.files("neuroassist").joinpath("data/rmdp_3state.json"))
