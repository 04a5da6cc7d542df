"""Episodic environments: trial classification and a deterministic chain."""
from dataclasses import dataclass

import numpy as np

from .. import _rng
from ..exceptions import ArgumentError, StateError

#: Reward pairs (correct, incorrect) compared in the reward-structure sweep.
SWEEP_STRUCTURES = ((1.0, -1.0), (2.0, -2.0), (3.0, -1.0), (0.25, -2.5), (1.0, 0.0))


@dataclass(frozen=True)
class RewardStructure:
    r_correct: float = 1.0
    r_incorrect: float = -1.0

    def __post_init__(self):
        if not self.r_correct > self.r_incorrect:
            raise ArgumentError("r_correct must exceed r_incorrect")

    @property
    def label(self):
        return f"{self.r_correct:g} to {self.r_incorrect:g}"


class ClassificationEnv:
    """Each step presents one trial; the action is the predicted class.

    An episode is one pass over a seeded permutation of the rows (or the
    first ``episode_len`` of them).  The next state never depends on the
    action taken.
    """

    def __init__(self, features, labels, reward=RewardStructure(), n_classes=None,
                 episode_len=None):
        self.features = np.asarray(features, dtype=np.float64)
        self.labels = np.asarray(labels, dtype=int)
        if len(self.labels) == 0:
            raise ArgumentError("environment needs at least one trial")
        if self.features.shape[0] != len(self.labels):
            raise ArgumentError("one label per feature row required")
        self.reward = reward
        self.n_actions = int(n_classes or self.labels.max() + 1)
        self.episode_len = int(episode_len or len(self.labels))
        if not 1 <= self.episode_len <= len(self.labels):
            raise ArgumentError("episode_len must be in 1..n_trials")
        self.order = np.arange(len(self.labels))
        self.cursor = 0
        self.done = True

    def reset(self, seed):
        self.order = _rng.stream(seed, "env-shuffle").permutation(len(self.labels))
        self.cursor = 0
        self.done = False
        return self.features[self.order[0]]

    @property
    def current_label(self):
        return int(self.labels[self.order[self.cursor]])

    def step(self, action):
        """Returns ``(reward, next_state, done)``; ``next_state`` is None at the end."""
        if self.done:
            raise StateError("step() called on a finished episode; call reset()")
        if not 0 <= action < self.n_actions:
            raise ArgumentError(f"action {action} outside 0..{self.n_actions - 1}")
        r = self.reward.r_correct if action == self.current_label \
            else self.reward.r_incorrect
        self.cursor += 1
        if self.cursor >= self.episode_len:
            self.done = True
            return r, None, True
        return r, self.features[self.order[self.cursor]], False


class ChainEnv:
    """Deterministic corridor used to check Q-learning against value iteration.

    States ``0..n_states-1``; action 0 moves left (clamped at 0), action 1
    moves right.  Entering the last state pays ``goal_reward`` and ends the
    episode.  States are one-hot vectors; episodes start uniformly in the
    non-terminal states.
    """

    n_actions = 2

    def __init__(self, n_states=5, goal_reward=1.0):
        if n_states < 2:
            raise ArgumentError("chain needs at least two states")
        self.n_states = n_states
        self.goal_reward = goal_reward
        self.pos = 0
        self.done = True

    def _obs(self):
        v = np.zeros(self.n_states)
        v[self.pos] = 1.0
        return v

    def reset(self, seed):
        self.pos = int(_rng.stream(seed, "chain-start").integers(self.n_states - 1))
        self.done = False
        return self._obs()

    def transition(self, s, a):
        nxt = max(s - 1, 0) if a == 0 else s + 1
        terminal = nxt == self.n_states - 1
        return nxt, (self.goal_reward if terminal else 0.0), terminal

    def step(self, action):
        if self.done:
            raise StateError("step() called on a finished episode; call reset()")
        self.pos, r, terminal = self.transition(self.pos, action)
        self.done = terminal
        return r, (None if terminal else self._obs()), terminal

    def optimal_q(self, gamma, tol=1e-12):
        """Value-iteration Q* for the non-terminal states, shape (n-1, 2)."""
        n = self.n_states - 1
        Q = np.zeros((n, 2))
        while True:
            new = np.empty_like(Q)
            for s in range(n):
                for a in range(2):
                    nxt, r, term = self.transition(s, a)
                    new[s, a] = r if term else r + gamma * Q[nxt].max()
            if np.max(np.abs(new - Q)) < tol:
                return new
            Q = new
