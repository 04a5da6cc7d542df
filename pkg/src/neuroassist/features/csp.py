"""One-vs-rest common spatial patterns."""
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ..exceptions import ArgumentError, NumericError


@dataclass(frozen=True)
class CspModel:
    """Spatial filters for one class against the rest.

    ``filters`` rows are generalized eigenvectors of
    ``(cov_class, cov_class + cov_rest)`` ordered by descending eigenvalue,
    so the first row maximizes class variance relative to the rest.
    """
    class_index: int
    filters: np.ndarray
    eigenvalues: np.ndarray
    regularization_eps: float
    degenerate: bool = False

    @property
    def n_components(self):
        return self.filters.shape[0]

    @property
    def n_channels(self):
        return self.filters.shape[1]

    def to_json(self):
        return {"class_index": int(self.class_index),
                "filters": self.filters.tolist(),
                "eigenvalues": self.eigenvalues.tolist(),
                "regularization_eps": float(self.regularization_eps),
                "degenerate": bool(self.degenerate)}

    @classmethod
    def from_json(cls, doc):
        return cls(int(doc["class_index"]), np.asarray(doc["filters"], dtype=float),
                   np.asarray(doc["eigenvalues"], dtype=float),
                   float(doc["regularization_eps"]), bool(doc.get("degenerate", False)))


def trial_covariance(samples):
    """Trace-normalized spatial covariance of one (channels x time) trial."""
    x = samples - samples.mean(axis=1, keepdims=True)
    c = x @ x.T
    tr = np.trace(c)
    if not tr > 0:
        raise ArgumentError("trial has zero variance on every channel")
    return c / tr


def _regularize(cov, eps_scale):
    n = cov.shape[0]
    return cov + eps_scale * np.trace(cov) / n * np.eye(n)


def csp_from_covariances(cov_class, cov_rest, n_components, eps_scale=1e-6,
                         class_index=0, degenerate_tol=1e-9):
    """Solve ``max_w (w' S_c w) / (w' S_r w)`` for the top ``n_components``.

    Both covariances get a ridge of ``eps_scale * trace / n_channels``.
    Eigenvalues lie in [0, 1]; the model is flagged degenerate when every
    eigenvalue sits within ``degenerate_tol`` of 0.5 (indistinguishable
    classes).
    """
    cov_class = np.asarray(cov_class, dtype=np.float64)
    cov_rest = np.asarray(cov_rest, dtype=np.float64)
    n_ch = cov_class.shape[0]
    if not 1 <= n_components <= n_ch:
        raise ArgumentError(f"n_components must be in 1..{n_ch}")
    a = _regularize(cov_class, eps_scale)
    b = a + _regularize(cov_rest, eps_scale)
    try:
        linalg.cholesky(b)
    except linalg.LinAlgError:
        raise NumericError("regularized composite covariance is not "
                           "positive definite") from None
    vals, vecs = linalg.eigh(a, b)
    order = np.argsort(vals)[::-1]
    vals = np.clip(vals[order], 0.0, 1.0)
    vecs = vecs[:, order]
    degenerate = bool(np.all(np.abs(vals - 0.5) <= degenerate_tol))
    return CspModel(class_index, vecs[:, :n_components].T.copy(),
                    vals[:n_components].copy(), float(eps_scale), degenerate)


def csp_fit_ovr(rec, n_components, eps_scale=1e-6):
    """Fit one CSP model per class (that class versus all others)."""
    labels = rec.labels
    covs = np.stack([trial_covariance(t.samples) for t in rec.trials])
    models = []
    for c in range(rec.n_classes):
        own = labels == c
        if own.sum() < 2 or (~own).sum() < 2:
            raise ArgumentError(
                f"class {c} needs at least 2 trials on each side of the split")
        models.append(csp_from_covariances(covs[own].mean(axis=0),
                                           covs[~own].mean(axis=0),
                                           n_components, eps_scale, c))
    return models


def csp_transform(model, samples):
    """Project a (channels x time) trial into CSP space."""
    samples = getattr(samples, "samples", samples)
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape[0] != model.n_channels:
        raise ArgumentError(
            f"trial has {samples.shape[0]} channels, model expects "
            f"{model.n_channels}")
    return model.filters @ samples
