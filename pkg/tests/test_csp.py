import numpy as np
import pytest
from scipy import linalg

from neuroassist import signals
from neuroassist.exceptions import ArgumentError
from neuroassist.features import (CspModel, csp_fit_ovr, csp_from_covariances,
                                  csp_transform, trial_covariance)
from conftest import make_recording


def cosine(a, b):
    return abs(float(np.dot(a, b))) / (np.linalg.norm(a) * np.linalg.norm(b))


class TestGeneralizedEigenproblem:
    def test_planted_diagonal(self):
        m = csp_from_covariances(np.diag([4.0, 1.0]), np.diag([1.0, 4.0]), 2)
        assert m.eigenvalues[0] == pytest.approx(0.8, abs=1e-6)
        assert cosine(m.filters[0], [1.0, 0.0]) >= 0.999

    def test_identical_classes_degenerate(self):
        S = np.array([[2.0, 0.3, 0.1], [0.3, 1.0, 0.2], [0.1, 0.2, 1.5]])
        m = csp_from_covariances(S, S, 3)
        np.testing.assert_allclose(m.eigenvalues, 0.5, atol=1e-9)
        assert m.degenerate

    def test_rayleigh_quotients(self):
        rng = np.random.default_rng(0)
        A0 = rng.normal(size=(5, 5))
        A1 = rng.normal(size=(5, 5))
        Sa, Sb = A0 @ A0.T, A1 @ A1.T
        m = csp_from_covariances(Sa, Sb, 5, eps_scale=0.0)
        for w, lam in zip(m.filters, m.eigenvalues):
            assert float(w @ Sa @ w) / float(w @ (Sa + Sb) @ w) == pytest.approx(lam, rel=1e-9)
        assert np.all(np.diff(m.eigenvalues) <= 0)

    def test_complementarity(self):
        rng = np.random.default_rng(1)
        A0 = rng.normal(size=(4, 4))
        A1 = rng.normal(size=(4, 4))
        Sa, Sb = A0 @ A0.T, A1 @ A1.T
        m0 = csp_from_covariances(Sa, Sb, 4)
        m1 = csp_from_covariances(Sb, Sa, 4)
        np.testing.assert_allclose(m0.eigenvalues, 1 - m1.eigenvalues[::-1], atol=1e-9)

    def test_component_range(self):
        with pytest.raises(ArgumentError):
            csp_from_covariances(np.eye(2), np.eye(2), 3)

    def test_json_round_trip(self):
        m = csp_from_covariances(np.diag([3.0, 1.0]), np.eye(2), 1, class_index=2)
        back = CspModel.from_json(m.to_json())
        assert back.class_index == 2
        np.testing.assert_array_equal(back.filters, m.filters)


class TestOneVsRest:
    def test_recovers_planted_direction(self):
        # pipeline defaults: 50 trials per class, seed 0, 7-30 Hz band-pass
        rec, gt = signals.generate_synthetic(signals.default_synthetic_spec(seed=0))
        rec = signals.bandpass_filter(rec, signals.FrequencyBand("mu-beta", 7.0, 30.0))
        models = csp_fit_ovr(rec, 3)
        for c, m in enumerate(models):
            assert cosine(m.filters[0], gt.discriminative_filter(c)) >= 0.95

    def test_own_class_variance_dominates(self, synthetic_4class):
        rec, _ = synthetic_4class
        for c, m in enumerate(csp_fit_ovr(rec, 2)):
            v = np.array([csp_transform(m, t)[0].var() for t in rec.trials])
            own = rec.labels == c
            assert v[own].mean() / v[~own].mean() >= 1.0

    def test_needs_two_trials_each_side(self):
        rec = make_recording(n_trials=3, n_classes=2)
        with pytest.raises(ArgumentError, match="at least 2 trials"):
            csp_fit_ovr(rec, 1)

    def test_trace_normalized_covariance(self):
        x = np.random.default_rng(2).normal(size=(3, 100)) * 7
        C = trial_covariance(x)
        assert np.trace(C) == pytest.approx(1.0, abs=1e-12)
        xc = x - x.mean(axis=1, keepdims=True)
        np.testing.assert_allclose(C, xc @ xc.T / np.trace(xc @ xc.T), rtol=1e-12)

    def test_matches_scipy_oracle_on_averaged_covariances(self, small_recording):
        rec = make_recording(n_trials=8, n_channels=3, n_classes=2, seed=9)
        models = csp_fit_ovr(rec, 3, eps_scale=0.0)
        covs = [trial_covariance(t.samples) for t in rec.trials]
        own = np.mean([c for c, t in zip(covs, rec.trials) if t.label == 0], axis=0)
        rest = np.mean([c for c, t in zip(covs, rec.trials) if t.label != 0], axis=0)
        ref = linalg.eigvalsh(own, own + rest)[::-1]
        np.testing.assert_allclose(models[0].eigenvalues, ref, atol=1e-10)


class TestTransform:
    def test_identity(self):
        x = np.random.default_rng(3).normal(size=(3, 20))
        m = CspModel(0, np.eye(3), np.ones(3), 0.0)
        np.testing.assert_array_equal(csp_transform(m, x), x)

    def test_single_filter(self):
        x = np.random.default_rng(4).normal(size=(3, 20))
        m = CspModel(0, np.array([[1.0, 0.0, 0.0]]), np.ones(1), 0.0)
        np.testing.assert_array_equal(csp_transform(m, x)[0], x[0])

    def test_naive_matmul(self):
        rng = np.random.default_rng(5)
        W, x = rng.normal(size=(2, 4)), rng.normal(size=(4, 15))
        m = CspModel(0, W, np.ones(2), 0.0)
        ref = [[sum(W[i, k] * x[k, j] for k in range(4)) for j in range(15)] for i in range(2)]
        np.testing.assert_allclose(csp_transform(m, signals.Trial(x, 0)), ref, atol=1e-12)

    def test_channel_mismatch(self):
        m = CspModel(0, np.eye(3), np.ones(3), 0.0)
        with pytest.raises(ArgumentError):
            csp_transform(m, np.zeros((2, 5)))
