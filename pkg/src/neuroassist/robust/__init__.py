"""Tabular robust MDPs and a robust natural actor-critic (RLTD critic, RQNPG actor)."""
from .actor import (ActorState, RegressionRule, critic_q, policy_probs, rqnpg,
                    sample_occupancy)
from .critic import (ContractionReport, CriticState, LinearFeatures, StepRule,
                     contraction_check, mspbre, rltd, stationary_of, tabular_features)
from .mdp import (NOMINAL, RobustMdp, UncertaintySet, bundled_fixture_path,
                  check_policy, greedy_policy, load_fixture, mdp_from_json,
                  policy_value, robust_bellman, robust_policy_evaluation, robust_q,
                  robust_value_iteration, sampled_worst_case, stationary_distribution,
                  uniform_policy, worst_case_value, worst_case_values)
from .rnac import RnacConfig, RnacDiagnostics, rnac, robust_value_at_rho

__all__ = [n for n in dir() if not n.startswith("_")]
