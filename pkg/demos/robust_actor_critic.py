"""Robust natural actor-critic on the bundled three-state fixture.

First the robust optimum is computed by value iteration under a
contamination set of radius 0.1.  The actor-critic loop then starts from
the uniform policy, and its learning curve is printed against that
optimum.  Finally the critic's contraction estimate is swept over the
radius, which shows where the sufficient condition stops holding.

    python demos/robust_actor_critic.py
"""
import numpy as np

from neuroassist.robust import (RnacConfig, UncertaintySet, bundled_fixture_path,
                                contraction_check, load_fixture, rnac,
                                robust_value_iteration, tabular_features,
                                uniform_policy)


def main():
    mdp = load_fixture(bundled_fixture_path())
    features = tabular_features(mdp)
    uset = UncertaintySet("contamination", 0.1)

    optimum = float(mdp.rho @ robust_value_iteration(mdp, uset))
    print(f"robust optimum at rho: {optimum:.4f}")

    policy, diag = rnac(mdp, uset, features, RnacConfig(T=14), seed=0)
    for t, v in zip(diag.t, diag.robust_value):
        print(f"  iteration {t:2d}: robust value {v:.4f}  gap {optimum - v:.4f}")
    print("greedy actions:", np.argmax(policy, axis=1))

    g = mdp.gamma
    print(f"\ncontamination radius threshold (1 - gamma) / (2 gamma) = "
          f"{(1 - g) / (2 * g):.4f}")
    pi = uniform_policy(mdp)
    for delta in (0.0, 0.02, 0.05, 0.1, 0.3, 0.6):
        rep = contraction_check(mdp, UncertaintySet("contamination", delta), features, pi)
        flag = "below" if rep.below_threshold else "above"
        print(f"  delta {delta:4.2f} ({flag} threshold): estimated factor {rep.factor:.3f}")


if __name__ == "__main__":
    main()
