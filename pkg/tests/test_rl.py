import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from neuroassist.exceptions import ArgumentError, NumericError, StateError
from neuroassist.features import FeatureMatrix
from neuroassist.hybrid import HybridConfig, init_network
from neuroassist.rl import (SWEEP_STRUCTURES, ChainEnv, ClassificationEnv,
                            LinearQNetwork, Metrics, RewardStructure, TrainSchedule,
                            confusion_matrix, epsilon_greedy, evaluate,
                            reward_based_accuracy, scores_from_confusion,
                            stratified_folds, td_target, train_dqn)
import oracles


def toy_env(n=12, n_classes=3, reward=RewardStructure(), episode_len=None):
    rng = np.random.default_rng(0)
    labels = np.arange(n) % n_classes
    X = np.eye(n_classes)[labels] + 0.01 * rng.normal(size=(n, n_classes))
    return ClassificationEnv(X, labels, reward, n_classes, episode_len)


class TestEnvironment:
    def test_reset_is_seeded(self):
        env = toy_env()
        env.reset(5)
        a = env.order.copy()
        env.reset(5)
        np.testing.assert_array_equal(env.order, a)
        assert env.cursor == 0
        assert sorted(env.order) == list(range(12))

    def test_orders_differ_across_seeds(self):
        env = toy_env(n=10)
        orders = set()
        for seed in range(100):
            env.reset(seed)
            orders.add(tuple(env.order))
        # 100 draws from 10! permutations: a collision has probability < 1.4e-3
        assert len(orders) >= 99

    def test_rewards_under_table_structures(self):
        env = toy_env(reward=RewardStructure(1, -1))
        env.reset(0)
        assert env.step(env.current_label)[0] == 1.0
        env = toy_env(reward=RewardStructure(1, 0))
        env.reset(0)
        assert env.step((env.current_label + 1) % 3)[0] == 0.0

    def test_episode_len_one(self):
        env = toy_env(episode_len=1)
        env.reset(0)
        r, nxt, done = env.step(0)
        assert done and nxt is None
        with pytest.raises(StateError):
            env.step(0)

    @given(st.integers(0, 2 ** 32), st.sampled_from(SWEEP_STRUCTURES))
    def test_reward_is_one_of_two(self, seed, pair):
        rs = RewardStructure(*pair)
        env = toy_env(reward=rs)
        env.reset(seed)
        rng = np.random.default_rng(seed)
        done = False
        while not done:
            r, _, done = env.step(int(rng.integers(3)))
            assert r in (rs.r_correct, rs.r_incorrect)

    def test_next_state_ignores_action(self):
        a, b = toy_env(), toy_env()
        a.reset(3)
        b.reset(3)
        for k in range(11):
            sa, sb = a.step(0)[1], b.step(2)[1]
            np.testing.assert_array_equal(sa, sb)

    def test_validation(self):
        with pytest.raises(ArgumentError):
            ClassificationEnv(np.zeros((0, 2)), [])
        env = toy_env()
        env.reset(0)
        with pytest.raises(ArgumentError):
            env.step(3)
        with pytest.raises(ArgumentError):
            RewardStructure(0, 0)


class TestPolicyAndTarget:
    def test_argmax(self):
        assert epsilon_greedy([0.1, 0.9, 0.3], 0.0, None) == 1

    def test_tie_goes_low(self):
        assert epsilon_greedy([0.7, 0.2, 0.7], 0.0, None) == 0

    def test_uniform_exploration(self):
        rng = np.random.default_rng(0)
        counts = np.bincount([epsilon_greedy([0, 0, 5, 0], 1.0, rng) for _ in range(10_000)],
                             minlength=4)
        assert np.all(np.abs(counts / 10_000 - 0.25) <= 0.02)
        assert stats.chisquare(counts).pvalue > 1e-3

    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=6),
           st.floats(0.01, 100), st.floats(-100, 100))
    def test_argmax_affine_invariance(self, q, a, b):
        q = np.array(q)
        if np.sort(q)[-1] - np.sort(q)[-2 if q.size > 1 else -1] < 1e-6 and q.size > 1:
            return
        assert epsilon_greedy(q, 0, None) == epsilon_greedy(a * q + b, 0, None)

    def test_bad_inputs(self):
        with pytest.raises(ArgumentError):
            epsilon_greedy([], 0.0, None)
        with pytest.raises(ArgumentError):
            epsilon_greedy([1.0], 1.5, np.random.default_rng(0))

    def test_td_target_cases(self):
        assert td_target(0.7, [5.0, 9.0], 0.0, False) == 0.7
        assert td_target(1.0, [0.5, 2.0], 0.9, False) == pytest.approx(2.8, abs=1e-15)
        assert td_target(-1.0, [100.0], 0.9, True) == -1.0

    @given(st.floats(-10, 10), st.floats(0, 5), st.floats(-10, 10), st.floats(0, 5))
    def test_td_target_monotone(self, r, dr, m, dm):
        assert td_target(r + dr, [m], 0.9, False) >= td_target(r, [m], 0.9, False)
        assert td_target(r, [m + dm], 0.9, False) >= td_target(r, [m], 0.9, False)


class TestTraining:
    @pytest.mark.parametrize("phases,total", [((4000, 500, 500), 5000), ((3000, 300, 300), 3600)])
    def test_step_counts(self, phases, total):
        env = toy_env()
        _, hist = train_dqn(LinearQNetwork(3, 3), env, TrainSchedule(phase_steps=phases))
        assert len(hist) == total
        assert hist.phase.count(0) == phases[0]
        assert hist.epsilon[0] == 1.0 and hist.epsilon[-1] == pytest.approx(0.05)

    def test_history_deterministic(self):
        runs = [train_dqn(LinearQNetwork(3, 3), toy_env(),
                          TrainSchedule(phase_steps=(200, 20), seed=9))[1] for _ in range(2)]
        assert runs[0] == runs[1]

    def test_frozen_hybrid_net(self):
        net = init_network(HybridConfig(6, 3, tokens_per_trial=2, d_model=4, n_heads=2,
                                        n_layers=1, d_ff=4, hidden=4, n_neurons=4), seed=2)
        env = toy_env(n=12, n_classes=3)
        env.features = np.tile(env.features, 2)
        before = net.copy()
        sched = TrainSchedule(phase_steps=(30, 5), epsilon_start=0.0, epsilon_end=0.0,
                              learning_rate=0.0)
        _, h1 = train_dqn(net, env, sched)
        _, h2 = train_dqn(net, env, sched)
        for k in net.params:
            assert net.params[k].tobytes() == before.params[k].tobytes(), k
        assert h1.reward == h2.reward

    def test_lr_decays_per_phase(self):
        s = TrainSchedule(learning_rate=0.0077, lr_decay=1e-4)
        assert s.learning_rate_for(2) == pytest.approx(0.0077 * (1 - 1e-4) ** 2, rel=1e-15)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergence_reported(self):
        env = toy_env()
        env.features = env.features * 1e200
        with pytest.raises(NumericError, match="step"):
            train_dqn(LinearQNetwork(3, 3), env,
                      TrainSchedule(phase_steps=(50,), learning_rate=1e10))

    def test_action_count_mismatch(self):
        with pytest.raises(ArgumentError):
            train_dqn(LinearQNetwork(3, 2), toy_env(), TrainSchedule(phase_steps=(5,)))

    def test_schedule_validation(self):
        with pytest.raises(ArgumentError):
            TrainSchedule(phase_steps=(10, 0))
        with pytest.raises(ArgumentError):
            TrainSchedule(epsilon_start=0.1, epsilon_end=0.2)
        with pytest.raises(ArgumentError):
            TrainSchedule(gamma=1.0)

    def test_chain_matches_value_iteration(self):
        gamma, n = 0.9, 5
        env = ChainEnv(n)
        qnet = LinearQNetwork(n, 2)
        train_dqn(qnet, env, TrainSchedule(phase_steps=(20_000,), epsilon_start=1.0,
                                           epsilon_end=0.3, gamma=gamma,
                                           learning_rate=0.05, lr_decay=0.0))
        # independent oracle: absorbing goal state, reward on entering it
        P = [[[0.0] * n for _ in range(2)] for _ in range(n)]
        R = [[0.0, 0.0] for _ in range(n)]
        for s in range(n - 1):
            P[s][0][max(s - 1, 0)] = 1.0
            P[s][1][s + 1] = 1.0
            R[s][1] = 1.0 if s + 1 == n - 1 else 0.0
        P[n - 1][0][n - 1] = P[n - 1][1][n - 1] = 1.0
        V = oracles.value_iteration(P, R, gamma)
        Qstar = np.array([[R[s][a] + gamma * sum(P[s][a][t] * V[t] for t in range(n))
                           for a in range(2)] for s in range(n - 1)])
        np.testing.assert_allclose(env.optimal_q(gamma), Qstar, atol=1e-10)
        learned = np.array([qnet.q_values(np.eye(n)[s]) for s in range(n - 1)])
        assert np.max(np.abs(learned - Qstar)) <= 0.05


class TestMetrics:
    def test_perfect(self):
        m = Metrics.from_confusion(np.diag([3, 4, 5]), RewardStructure())
        assert m.accuracy == m.macro_precision == m.macro_recall == m.macro_f1 == 100.0

    def test_binary_hand_computed(self):
        s = scores_from_confusion([[1, 1], [0, 2]])
        assert s["accuracy"] == 75.0
        # class 0: P=1, R=1/2, F1=2/3; class 1: P=2/3, R=1, F1=4/5
        assert s["f1"] == pytest.approx(100 * (2 / 3 + 4 / 5) / 2, abs=1e-12)
        assert s["f1"] == pytest.approx(73.33, abs=0.01)
        assert s["precision"] == pytest.approx(100 * (1 + 2 / 3) / 2)
        assert s["recall"] == pytest.approx(75.0)

    def test_zero_denominator_flagged(self):
        s = scores_from_confusion([[2, 0, 0], [1, 0, 0], [0, 0, 3]])
        assert s["undefined"] == [1]

    def test_accuracy_is_trace_ratio(self):
        cm = np.random.default_rng(0).integers(0, 9, size=(4, 4))
        assert Metrics.from_confusion(cm, RewardStructure()).accuracy == \
            pytest.approx(100 * np.trace(cm) / cm.sum(), rel=1e-15)

    def test_confusion_layout(self):
        cm = confusion_matrix([0, 0, 1, 2], [0, 1, 1, 0], 3)
        assert cm.tolist() == [[1, 1, 0], [0, 1, 0], [1, 0, 0]]

    def test_k_fold_mean(self):
        labels = np.repeat(np.arange(3), 20)
        X = np.eye(3)[labels]
        X[::7] = np.roll(X[::7], 1, axis=1)
        qnet = LinearQNetwork(3, 3)
        qnet.params["W"][:] = np.eye(3)
        m = evaluate(qnet, FeatureMatrix(X, ["a", "b", "c"], labels), RewardStructure(),
                     k_folds=10, n_classes=3)
        for key, vals in m.fold_values.items():
            assert len(vals) == 10
            assert m.fold_mean[key] == pytest.approx(sum(vals) / 10, abs=1e-12)

    def test_folds_too_many(self):
        with pytest.raises(ArgumentError):
            stratified_folds([0, 0, 1, 1, 1], 3, seed=0)

    def test_folds_stratified(self):
        labels = np.repeat([0, 1], [30, 10])
        fold = stratified_folds(labels, 5, seed=1)
        for f in range(5):
            assert np.bincount(labels[fold == f]).tolist() == [6, 2]


class TestRewardBasedAccuracy:
    def test_all_correct(self):
        assert reward_based_accuracy(np.diag([5, 5]), RewardStructure(1, -1)) == 100.0

    def test_three_quarters_under_two(self):
        cm = np.array([[3, 1], [0, 0]])
        assert reward_based_accuracy(cm, RewardStructure(2, -2)) == pytest.approx(100.0)

    def test_anchor_199_21(self):
        # 100 (2p - 2(1 - p)) = 199.21  =>  p = 0.998...
        p = (199.21 / 100 + 2) / 4
        assert p == pytest.approx(0.998, abs=1e-3)

    @given(st.integers(0, 50), st.integers(0, 50))
    def test_identities(self, right, wrong):
        if right + wrong == 0:
            return
        cm = np.array([[right, wrong], [0, 0]])
        p = right / (right + wrong)
        acc = Metrics.from_confusion(cm, RewardStructure()).accuracy
        assert reward_based_accuracy(cm, RewardStructure(1, 0)) == pytest.approx(acc, abs=1e-12)
        assert reward_based_accuracy(cm, RewardStructure(1, -1)) == \
            pytest.approx(100 * (2 * p - 1), abs=1e-12)

    def test_history_form(self):
        assert reward_based_accuracy([1, 1, -1, 1], RewardStructure()) == 50.0

    def test_empty(self):
        with pytest.raises(ArgumentError):
            reward_based_accuracy([], RewardStructure())
