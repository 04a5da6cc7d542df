"""Online one-step deep Q-learning (no replay buffer, no target network)."""
import csv
from dataclasses import dataclass, field

import numpy as np

from .. import _rng
from ..exceptions import ArgumentError, NumericError
from ..hybrid import network


@dataclass(frozen=True)
class TrainSchedule:
    phase_steps: tuple = (4000, 500, 500)
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    gamma: float = 0.0
    learning_rate: float = 0.0077
    lr_decay: float = 1e-4
    optimizer: str = "sgd"
    seed: int = 0

    def __post_init__(self):
        if not self.phase_steps or any(int(s) <= 0 for s in self.phase_steps):
            raise ArgumentError("phase_steps must be positive")
        if not 0 <= self.epsilon_end <= self.epsilon_start <= 1:
            raise ArgumentError("need 0 <= epsilon_end <= epsilon_start <= 1")
        if not 0 <= self.gamma < 1:
            raise ArgumentError("gamma must lie in [0, 1)")
        if self.optimizer not in ("sgd", "adam"):
            raise ArgumentError(f"unknown optimizer {self.optimizer!r}")

    @property
    def total_steps(self):
        return int(sum(self.phase_steps))

    def epsilon(self, step):
        """Linear decay from ``epsilon_start`` to ``epsilon_end``."""
        n = self.total_steps
        frac = step / (n - 1) if n > 1 else 1.0
        return self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac

    def learning_rate_for(self, phase):
        return self.learning_rate * (1.0 - self.lr_decay) ** phase


def epsilon_greedy(q_values, epsilon, rng):
    """Uniform random action with probability ``epsilon``, else arg-max.

    Ties in the arg-max go to the lowest index.
    """
    q = np.asarray(q_values, dtype=np.float64)
    if q.size == 0:
        raise ArgumentError("empty q_values")
    if not 0 <= epsilon <= 1:
        raise ArgumentError("epsilon must lie in [0, 1]")
    if epsilon > 0 and rng.random() < epsilon:
        return int(rng.integers(q.size))
    return int(np.argmax(q))


def td_target(reward, q_next, gamma, done):
    """``reward + gamma * max(q_next)``, or just ``reward`` on terminal steps."""
    if done or gamma == 0:
        return float(reward)
    return float(reward + gamma * np.max(q_next))


class Sgd:
    def step(self, params, grads, lr):
        for k, g in grads.items():
            params[k] -= lr * g


class Adam:
    def __init__(self, beta1=0.9, beta2=0.999, eps=1e-8):
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m, self.v, self.t = {}, {}, 0

    def step(self, params, grads, lr):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for k, g in grads.items():
            m = self.m[k] = b1 * self.m.get(k, 0.0) + (1 - b1) * g
            v = self.v[k] = b2 * self.v.get(k, 0.0) + (1 - b2) * g * g
            mhat = m / (1 - b1 ** self.t)
            vhat = v / (1 - b2 ** self.t)
            params[k] -= lr * mhat / (np.sqrt(vhat) + self.eps)


def make_optimizer(name):
    return Adam() if name == "adam" else Sgd()


class HybridQNetwork:
    """Adapter exposing the hybrid network to the Q-learning loop."""

    def __init__(self, net):
        self.net = net

    @property
    def params(self):
        return self.net.params

    def forward(self, state, train=True):
        return network.forward(self.net, state, "train" if train else "eval")

    def q_values(self, state):
        return network.q_values(self.net, state)

    def backward(self, trace, dq):
        return network.backward(self.net, trace, dq)

    def after_step(self, trace):
        network.apply_stdp(self.net, trace)


class LinearQNetwork:
    """``q = W s + b``; with one-hot states this is a tabular Q-function."""

    def __init__(self, n_inputs, n_actions):
        self.params = {"W": np.zeros((n_actions, n_inputs)), "b": np.zeros(n_actions)}

    def forward(self, state, train=True):
        s = np.asarray(state, dtype=np.float64)
        return self.params["W"] @ s + self.params["b"], s

    def q_values(self, state):
        return self.forward(state, False)[0]

    def backward(self, trace, dq):
        return {"W": np.outer(dq, trace), "b": np.asarray(dq, dtype=np.float64)}

    def after_step(self, trace):
        pass


@dataclass
class History:
    step: list = field(default_factory=list)
    phase: list = field(default_factory=list)
    epsilon: list = field(default_factory=list)
    action: list = field(default_factory=list)
    reward: list = field(default_factory=list)
    loss: list = field(default_factory=list)

    def __len__(self):
        return len(self.step)

    def write_csv(self, path, comment=None):
        with open(path, "w", newline="") as fh:
            if comment:
                fh.write(f"# {comment}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "phase", "epsilon", "action", "reward", "loss"])
            for row in zip(self.step, self.phase, self.epsilon, self.action,
                           self.reward, self.loss):
                s, ph, eps, a, r, l = row
                w.writerow([s, ph, repr(float(eps)), a, repr(float(r)), repr(float(l))])


def _as_qnet(net):
    if isinstance(net, network.HybridNetParams):
        return HybridQNetwork(net)
    return net


def train_dqn(net, env, schedule):
    """Run the phased online Q-learning loop.

    Per step: forward, epsilon-greedy action, environment step, squared TD
    error on the taken action, one optimizer update, then the network's
    post-step hook (STDP for the hybrid network).  Epsilon decays linearly
    over all steps; the learning rate shrinks by ``(1 - lr_decay)`` at each
    phase boundary.  Episodes restart automatically when they end.

    Returns ``(net, history)``; ``net`` is updated in place.
    """
    qnet = _as_qnet(net)
    n_actions = getattr(env, "n_actions", None)
    probe_q = None
    opt = make_optimizer(schedule.optimizer)
    explore = _rng.stream(schedule.seed, "exploration")
    episodes = _rng.stream(schedule.seed, "episodes")
    hist = History()
    state = None
    step = 0
    for phase, n_steps in enumerate(schedule.phase_steps):
        lr = schedule.learning_rate_for(phase)
        for _ in range(int(n_steps)):
            if state is None:
                state = env.reset(int(episodes.integers(2 ** 63)))
            q, trace = qnet.forward(state, True)
            if probe_q is None:
                probe_q = q
                if n_actions is not None and q.size != n_actions:
                    raise ArgumentError(f"network has {q.size} actions, "
                                        f"environment {n_actions}")
            eps = schedule.epsilon(step)
            action = epsilon_greedy(q, eps, explore)
            reward, next_state, done = env.step(action)
            q_next = None if done else qnet.q_values(next_state)
            target = td_target(reward, q_next, schedule.gamma, done)
            err = q[action] - target
            loss = err * err
            if not np.isfinite(loss):
                raise NumericError(f"non-finite loss at step {step}")
            if lr != 0:
                dq = np.zeros_like(q)
                dq[action] = 2.0 * err
                opt.step(qnet.params, qnet.backward(trace, dq), lr)
                qnet.after_step(trace)
            hist.step.append(step)
            hist.phase.append(phase)
            hist.epsilon.append(eps)
            hist.action.append(action)
            hist.reward.append(float(reward))
            hist.loss.append(float(loss))
            state = None if done else next_state
            step += 1
    return net, hist
