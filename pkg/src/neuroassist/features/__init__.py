"""Signal features: Welch PSD, moments, one-vs-rest CSP and assembly."""
from .assembly import (COMPONENT_FEATURES, BadTrialError, FeatureMatrix,
                       NormalizationParams, apply_normalizer, assemble_features,
                       feature_names, fit_normalizer, normalize,
                       read_feature_csv, write_feature_csv)
from .baseline import LinearModel, predict, train_linear_baseline
from .csp import (CspModel, csp_fit_ovr, csp_from_covariances, csp_transform,
                  trial_covariance)
from .moments import abs_diff, kurtosis, rms, skewness
from .spectral import (PsdEstimate, WelchConfig, band_power, hann,
                       modified_periodograms, welch_psd)
