"""One-vs-rest linear classifier trained on hinge loss (SVM stand-in)."""
from dataclasses import dataclass

import numpy as np

from .. import _rng
from ..exceptions import ArgumentError


@dataclass
class LinearModel:
    weights: np.ndarray   # (n_classes, n_features)
    bias: np.ndarray      # (n_classes,)

    def scores(self, X):
        return np.asarray(X, dtype=np.float64) @ self.weights.T + self.bias


def train_linear_baseline(fm, epochs=50, lr=0.01, seed=0, l2=1e-3, n_classes=None):
    """Per-sample subgradient descent on the L2-penalized OVR hinge loss.

    Weights start at zero, so ``epochs=0`` predicts class 0 everywhere.
    """
    X, y = fm.values, fm.labels
    present = np.unique(y)
    if present.size < 2:
        raise ArgumentError("training data must contain at least two classes")
    k = int(n_classes or y.max() + 1)
    model = LinearModel(np.zeros((k, X.shape[1])), np.zeros(k))
    rng = _rng.stream(seed, "baseline-shuffle")
    targets = np.where(np.arange(k)[None, :] == y[:, None], 1.0, -1.0)
    for _ in range(epochs):
        for i in rng.permutation(len(y)):
            margin = targets[i] * (model.weights @ X[i] + model.bias)
            active = (margin < 1.0) * targets[i]
            model.weights *= 1.0 - lr * l2
            model.weights += lr * active[:, None] * X[i][None, :]
            model.bias += lr * active
    return model


def predict(model, fm):
    """Arg-max class per row; ties go to the lowest index."""
    X = getattr(fm, "values", fm)
    return np.argmax(model.scores(X), axis=1)
