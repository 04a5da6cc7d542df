"""Classification metrics, k-fold summaries and reward-based accuracy."""
import json
from dataclasses import dataclass, field

import numpy as np

from .. import _rng
from ..exceptions import ArgumentError
from .dqn import HybridQNetwork, _as_qnet

METRIC_KEYS = ("accuracy", "f1", "precision", "recall", "reward_based_accuracy")


def confusion_matrix(y_true, y_pred, n_classes):
    """Rows are true classes, columns predicted classes."""
    cm = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(cm, (np.asarray(y_true, dtype=int), np.asarray(y_pred, dtype=int)), 1)
    return cm


def reward_based_accuracy(data, reward):
    """100 x mean per-step reward.

    ``data`` is either a confusion matrix (2D), giving
    ``100 (p r_correct + (1 - p) r_incorrect)`` with ``p`` the fraction
    correct, or a 1D sequence of per-step rewards.
    """
    arr = np.asarray(data, dtype=np.float64)
    if arr.size == 0:
        raise ArgumentError("reward_based_accuracy needs at least one prediction")
    if arr.ndim == 2:
        total = arr.sum()
        if total == 0:
            raise ArgumentError("reward_based_accuracy needs at least one prediction")
        p = np.trace(arr) / total
        return float(100.0 * (p * reward.r_correct + (1.0 - p) * reward.r_incorrect))
    return float(100.0 * arr.mean())


def scores_from_confusion(cm):
    """Accuracy and macro precision/recall/F1 in percent.

    Classes whose precision or recall denominator is zero contribute 0 and
    are listed in the returned ``undefined`` set.
    """
    cm = np.asarray(cm, dtype=np.float64)
    tp = np.diag(cm)
    pred_tot = cm.sum(axis=0)
    true_tot = cm.sum(axis=1)
    undefined = sorted(set(np.flatnonzero(pred_tot == 0)) | set(np.flatnonzero(true_tot == 0)))
    with np.errstate(divide="ignore", invalid="ignore"):
        prec = np.where(pred_tot > 0, tp / pred_tot, 0.0)
        rec = np.where(true_tot > 0, tp / true_tot, 0.0)
        f1 = np.where(prec + rec > 0, 2 * prec * rec / (prec + rec), 0.0)
    return {"accuracy": 100.0 * tp.sum() / cm.sum(),
            "precision": 100.0 * prec.mean(),
            "recall": 100.0 * rec.mean(),
            "f1": 100.0 * f1.mean(),
            "undefined": [int(c) for c in undefined]}


@dataclass
class Metrics:
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    confusion: np.ndarray
    reward_based_accuracy: float
    undefined_classes: list = field(default_factory=list)
    fold_values: dict = None
    fold_mean: dict = None
    fold_std: dict = None

    @classmethod
    def from_confusion(cls, cm, reward):
        s = scores_from_confusion(cm)
        return cls(s["accuracy"], s["precision"], s["recall"], s["f1"],
                   np.asarray(cm), reward_based_accuracy(cm, reward), s["undefined"])

    def as_row(self):
        return {"accuracy": self.accuracy, "f1": self.macro_f1,
                "precision": self.macro_precision, "recall": self.macro_recall,
                "reward_based_accuracy": self.reward_based_accuracy}

    def to_json(self):
        doc = dict(self.as_row())
        doc["confusion"] = np.asarray(self.confusion).tolist()
        doc["undefined_classes"] = list(self.undefined_classes)
        if self.fold_values is not None:
            doc["fold_values"] = self.fold_values
            doc["fold_mean"] = self.fold_mean
            doc["fold_std"] = self.fold_std
        return doc

    def write_json(self, path, extra=None):
        doc = self.to_json()
        if extra:
            doc.update(extra)
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")


def greedy_predictions(net, X):
    qnet = _as_qnet(net)
    return np.array([int(np.argmax(qnet.q_values(x))) for x in X], dtype=int)


def stratified_folds(labels, k, seed):
    """Assign each row to one of ``k`` folds, class by class, round robin."""
    labels = np.asarray(labels, dtype=int)
    counts = np.bincount(labels)
    present = counts[counts > 0]
    if k < 2 or k > present.min():
        raise ArgumentError(f"k_folds={k} must be in 2..{int(present.min())} "
                            "(smallest class count)")
    rng = _rng.stream(seed, "folds")
    fold = np.empty(len(labels), dtype=int)
    for c in np.flatnonzero(counts):
        idx = rng.permutation(np.flatnonzero(labels == c))
        fold[idx] = np.arange(len(idx)) % k
    return fold


def evaluate(net, fm, reward, k_folds=None, seed=0, n_classes=None):
    """Greedy (epsilon = 0) evaluation of a Q-network on a feature matrix.

    With ``k_folds`` the rows are split into stratified folds; per-fold
    metrics and their mean and population std are attached.
    """
    X, y = fm.values, fm.labels
    if len(y) == 0:
        raise ArgumentError("cannot evaluate on an empty feature matrix")
    k = int(n_classes or _n_actions(net) or y.max() + 1)
    pred = greedy_predictions(net, X)
    m = Metrics.from_confusion(confusion_matrix(y, pred, k), reward)
    if k_folds:
        fold = stratified_folds(y, int(k_folds), seed)
        vals = {key: [] for key in METRIC_KEYS}
        for f in range(int(k_folds)):
            sel = fold == f
            row = Metrics.from_confusion(confusion_matrix(y[sel], pred[sel], k),
                                         reward).as_row()
            for key in METRIC_KEYS:
                vals[key].append(row[key])
        m.fold_values = vals
        m.fold_mean = {key: float(np.mean(v)) for key, v in vals.items()}
        m.fold_std = {key: float(np.std(v)) for key, v in vals.items()}
    return m


def _n_actions(net):
    qnet = _as_qnet(net)
    if isinstance(qnet, HybridQNetwork):
        return qnet.net.config.n_actions
    return None
