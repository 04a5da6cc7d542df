"""The outer robust natural actor-critic loop and its diagnostics."""
import csv
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import ArgumentError
from .actor import ActorState, RegressionRule, policy_probs, rqnpg
from .critic import StepRule, contraction_check, mspbre, rltd
from .mdp import robust_policy_evaluation


@dataclass(frozen=True)
class RnacConfig:
    T: int = 20
    K: int = 5000
    N: int = 1000
    eta_schedule: str = "geometric"
    eta0: float = 0.1
    eta_growth: float = 1.5
    eta_cap: float = 10.0
    critic_rule: StepRule = field(default_factory=StepRule)
    actor_rule: RegressionRule = field(default_factory=RegressionRule)
    n_probes: int = 16

    def __post_init__(self):
        if self.T < 0 or self.K <= 0 or self.N <= 0:
            raise ArgumentError("need T >= 0 and K, N > 0")
        if self.eta_schedule not in ("geometric", "constant"):
            raise ArgumentError(f"unknown eta schedule {self.eta_schedule!r}")
        if self.eta0 <= 0 or self.eta_growth <= 1 or self.eta_cap <= 0:
            raise ArgumentError("need eta0 > 0, eta_growth > 1, eta_cap > 0")

    def eta(self, t):
        if self.eta_schedule == "constant":
            return self.eta0
        return min(self.eta0 * self.eta_growth ** t, self.eta_cap)


@dataclass
class RnacDiagnostics:
    t: list = field(default_factory=list)
    robust_value: list = field(default_factory=list)
    mspbre: list = field(default_factory=list)
    contraction_estimate: list = field(default_factory=list)

    def add(self, t, value, err=None, factor=None):
        self.t.append(t)
        self.robust_value.append(value)
        self.mspbre.append(err)
        self.contraction_estimate.append(factor)

    def write_csv(self, path, comment=None):
        def fmt(x):
            return "" if x is None else repr(float(x))
        with open(path, "w", newline="") as fh:
            if comment:
                fh.write(f"# {comment}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "robust_value", "mspbre", "contraction_estimate"])
            for row in zip(self.t, self.robust_value, self.mspbre,
                           self.contraction_estimate):
                w.writerow([row[0]] + [fmt(x) for x in row[1:]])


def robust_value_at_rho(mdp, uset, pi):
    return float(mdp.rho @ robust_policy_evaluation(mdp, uset, pi))


def rnac(mdp, uset, features, cfg=RnacConfig(), seed=0, diagnostics=True):
    """Alternate RLTD critic and RQNPG actor updates for ``cfg.T`` rounds.

    Starts from the uniform policy (``theta = 0``).  Row ``t`` of the
    diagnostics holds the robust value of ``pi_t`` at ``rho`` together with
    the critic's projected error and a contraction estimate; a final row
    ``t = T`` holds the value of the returned policy.  Returns
    ``(policy, diagnostics)``.
    """
    features.check(mdp)
    actor = ActorState.uniform(features, cfg.actor_rule)
    diag = RnacDiagnostics()
    seeds = np.random.SeedSequence(int(seed) & (2 ** 64 - 1)).generate_state(2 * cfg.T + 1)
    for t in range(cfg.T):
        pi = policy_probs(actor.theta, features, mdp)
        critic = rltd(pi, mdp, uset, features, cfg.K, cfg.critic_rule, int(seeds[2 * t]))
        if diagnostics:
            diag.add(t, robust_value_at_rho(mdp, uset, pi),
                     mspbre(critic.w, pi, mdp, uset, features),
                     contraction_check(mdp, uset, features, pi, cfg.n_probes,
                                       int(seeds[2 * t + 1])).factor)
        actor = rqnpg(actor, critic.w, mdp, uset, features, cfg.N, cfg.eta(t),
                      int(seeds[2 * t + 1]))
    pi = policy_probs(actor.theta, features, mdp)
    diag.add(cfg.T, robust_value_at_rho(mdp, uset, pi))
    return pi, diag
