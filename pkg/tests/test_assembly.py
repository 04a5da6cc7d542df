import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from neuroassist import signals
from neuroassist.exceptions import ArgumentError, StateError
from neuroassist.features import (BadTrialError, FeatureMatrix, assemble_features,
                                  csp_fit_ovr, csp_transform, feature_names, normalize,
                                  predict, read_feature_csv, rms, train_linear_baseline,
                                  write_feature_csv)
from neuroassist.features.csp import CspModel
from neuroassist.pipeline import stratified_split
from conftest import make_recording


@pytest.fixture(scope="module")
def fitted(synthetic_4class):
    rec, _ = synthetic_4class
    rec = signals.bandpass_filter(rec, signals.FrequencyBand("mu-beta", 7.0, 30.0))
    models = csp_fit_ovr(rec, 3)
    return rec, models, assemble_features(rec, models)


class TestAssembly:
    def test_layout(self, fitted):
        rec, models, fm = fitted
        assert fm.n_features == 72
        assert fm.feature_names[:6] == ["c0_m0_kurtosis", "c0_m0_skewness", "c0_m0_rms",
                                        "c0_m0_absdiff_rev", "c0_m0_alpha_power",
                                        "c0_m0_beta_power"]
        assert feature_names(4, 3) == fm.feature_names

    def test_column_recomputation(self, fitted):
        rec, models, fm = fitted
        col = fm.feature_names.index("c0_m1_rms")
        for i in (0, 7, 19):
            assert fm.values[i, col] == rms(csp_transform(models[1], rec.trials[i])[0])

    def test_zero_trial_reported(self):
        rec = make_recording(n_trials=4, n_channels=2, n_times=300)
        rec.trials[2] = signals.Trial(np.zeros((2, 300)), rec.trials[2].label)
        model = CspModel(0, np.eye(2), np.ones(2), 0.0)
        with pytest.raises(BadTrialError, match="trial 2"):
            assemble_features(rec, [model])
        fm = assemble_features(rec, [model], on_bad="drop")
        assert fm.bad_trials == [2] and fm.values.shape[0] == 3

    def test_parallel_matches_serial(self, fitted):
        rec, models, fm = fitted
        par = assemble_features(rec.subset(range(16)), models, jobs=3)
        np.testing.assert_array_equal(par.values, fm.values[:16])

    def test_csv_round_trip(self, fitted, tmp_path):
        fm = fitted[2]
        write_feature_csv(fm, tmp_path / "f.csv", comment="config_hash=abc seed=1")
        assert (tmp_path / "f.csv").read_text().startswith("# config_hash=abc seed=1\n")
        back = read_feature_csv(tmp_path / "f.csv")
        np.testing.assert_array_equal(back.values, fm.values)
        np.testing.assert_array_equal(back.labels, fm.labels)


class TestNormalize:
    def test_minmax_anchor(self):
        fm = FeatureMatrix(np.array([[0.0], [5.0], [10.0]]), ["a"], [0, 1, 0])
        np.testing.assert_allclose(normalize(fm, "minmax").values.ravel(), [0, 0.5, 1])

    def test_zscore_statistics(self):
        X = np.random.default_rng(0).normal(3, 7, size=(50, 4))
        out = normalize(FeatureMatrix(X, list("abcd"), np.zeros(50)), "zscore").values
        np.testing.assert_allclose(out.mean(axis=0), 0, atol=1e-9)
        np.testing.assert_allclose(out.std(axis=0), 1, atol=1e-9)

    def test_apply_uses_train_parameters(self):
        rng = np.random.default_rng(1)
        tr = FeatureMatrix(rng.normal(2, 3, size=(30, 3)), list("abc"), np.zeros(30))
        te = FeatureMatrix(rng.normal(size=(10, 3)), list("abc"), np.zeros(10))
        fitted = normalize(tr, "zscore")
        out = normalize(te, mode="apply", state=fitted.norm_state).values
        mu = [sum(r[j] for r in tr.values) / 30 for j in range(3)]
        sd = [(sum((r[j] - mu[j]) ** 2 for r in tr.values) / 30) ** 0.5 for j in range(3)]
        ref = [[(r[j] - mu[j]) / sd[j] for j in range(3)] for r in te.values]
        np.testing.assert_allclose(out, ref, rtol=1e-12)

    def test_double_zscore_second_is_noop(self):
        X = np.random.default_rng(2).normal(size=(40, 3))
        once = normalize(FeatureMatrix(X, list("abc"), np.zeros(40)))
        twice = normalize(once)
        np.testing.assert_allclose(twice.values, once.values, atol=1e-9)
        assert len(twice.norm_state) == 2

    @given(arrays(np.float64, (12, 3), elements=st.floats(-1e3, 1e3)))
    def test_minmax_idempotent(self, X):
        fm = normalize(FeatureMatrix(X, list("abc"), np.zeros(12)), "minmax")
        again = normalize(fm, "minmax")
        np.testing.assert_allclose(again.values, fm.values, atol=1e-12)

    def test_constant_column_maps_to_zero(self):
        X = np.column_stack([np.full(5, 3.0), np.arange(5.0)])
        fm = normalize(FeatureMatrix(X, ["a", "b"], np.zeros(5)))
        assert np.all(fm.values[:, 0] == 0)
        assert fm.norm_state[0].constant.tolist() == [True, False]

    def test_apply_without_state(self):
        fm = FeatureMatrix(np.ones((2, 1)), ["a"], [0, 0])
        with pytest.raises(StateError):
            normalize(fm, mode="apply")


class TestBaseline:
    def test_separable_blobs(self):
        rng = np.random.default_rng(3)
        X = np.vstack([rng.normal(-3, 0.5, size=(40, 2)), rng.normal(3, 0.5, size=(40, 2))])
        y = np.repeat([0, 1], 40)
        fm = FeatureMatrix(X, ["a", "b"], y)
        model = train_linear_baseline(fm, epochs=20, lr=0.05)
        assert np.mean(predict(model, fm) == y) == 1.0

    def test_zero_epochs_predicts_class_zero(self):
        fm = FeatureMatrix(np.random.default_rng(4).normal(size=(6, 2)), ["a", "b"],
                           [0, 1, 2, 0, 1, 2])
        model = train_linear_baseline(fm, epochs=0)
        assert np.all(model.weights == 0)
        assert np.all(predict(model, fm) == 0)

    def test_synthetic_csp_features(self, fitted):
        rec, models, fm = fitted
        y = fm.labels
        train, test = stratified_split(y, 0.75, seed=0)
        tr = normalize(fm.subset(train))
        te = normalize(fm.subset(test), mode="apply", state=tr.norm_state)
        model = train_linear_baseline(tr, epochs=60, lr=0.01)
        assert np.mean(predict(model, te) == te.labels) >= 0.9

    def test_single_class_rejected(self):
        with pytest.raises(ArgumentError):
            train_linear_baseline(FeatureMatrix(np.ones((3, 1)), ["a"], [1, 1, 1]))
