"""Feature assembly from CSP components, normalization and CSV export."""
import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..exceptions import ArgumentError, FormatError, StateError
from ..signals import FrequencyBand
from .csp import csp_transform
from .moments import abs_diff, kurtosis, rms, skewness
from .spectral import WelchConfig, band_power, welch_psd

#: Per-component feature order within one (model, component) block.
COMPONENT_FEATURES = ("kurtosis", "skewness", "rms", "absdiff_rev",
                      "alpha_power", "beta_power")


class BadTrialError(ArgumentError):
    """A trial produced an undefined feature (e.g. a flat CSP component)."""

    def __init__(self, trial, model, component, reason):
        self.trial, self.model, self.component = trial, model, component
        super().__init__(f"trial {trial}, model {model}, component {component}: "
                         f"{reason}")


@dataclass(frozen=True)
class NormalizationParams:
    method: str
    center: np.ndarray
    scale: np.ndarray
    constant: np.ndarray

    def to_json(self):
        return {"method": self.method, "center": self.center.tolist(),
                "scale": self.scale.tolist(),
                "constant": [bool(v) for v in self.constant]}

    @classmethod
    def from_json(cls, doc):
        return cls(doc["method"], np.asarray(doc["center"], dtype=float),
                   np.asarray(doc["scale"], dtype=float),
                   np.asarray(doc["constant"], dtype=bool))


@dataclass
class FeatureMatrix:
    values: np.ndarray
    feature_names: list
    labels: np.ndarray
    norm_state: list = field(default_factory=list)
    bad_trials: list = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=int)
        if self.values.ndim != 2 or self.values.shape[0] != len(self.labels):
            raise ArgumentError("values must be (trials x features) with one "
                                "label per row")
        if self.values.shape[1] != len(self.feature_names):
            raise ArgumentError("feature_names does not match column count")
        if not np.all(np.isfinite(self.values)):
            raise ArgumentError("feature matrix contains non-finite values")

    @property
    def n_features(self):
        return self.values.shape[1]

    def subset(self, rows):
        rows = np.asarray(rows, dtype=int)
        return replace(self, values=self.values[rows], labels=self.labels[rows],
                       bad_trials=[])


def feature_names(n_models, n_components):
    return [f"c{c}_m{m}_{feat}"
            for m in range(n_models)
            for c in range(n_components)
            for feat in COMPONENT_FEATURES]


def _trial_features(index, samples, fs, models, welch, bands):
    out = []
    for m, model in enumerate(models):
        comps = csp_transform(model, samples)
        seg, nfft, fs_eff = welch.resolve(comps.shape[1], fs)
        for c, z in enumerate(comps):
            try:
                moments = [kurtosis(z), skewness(z), rms(z), abs_diff(z, z[::-1])]
                psd = welch_psd(z, fs_eff, seg, welch.overlap_frac, nfft,
                                welch.averaging)
                powers = [band_power(psd, bands["alpha"]),
                          band_power(psd, bands["beta"])]
            except ArgumentError as exc:
                raise BadTrialError(index, m, c, exc) from None
            out.extend(moments + powers)
    return out


def assemble_features(rec, csp_models, welch_cfg=None, bands=None,
                      on_bad="raise", jobs=1):
    """Build the (trials x features) matrix from CSP-projected trials.

    For every class model ``m`` and component ``c`` the block
    ``COMPONENT_FEATURES`` is appended; columns are named ``c{c}_m{m}_{feat}``
    with models outermost.  ``absdiff_rev`` pairs a component with its own
    time reversal.  With ``on_bad="drop"`` trials whose features are
    undefined are skipped and listed in ``bad_trials``.
    """
    welch_cfg = welch_cfg or WelchConfig()
    bands = bands or {"alpha": FrequencyBand.named("alpha"),
                      "beta": FrequencyBand.named("beta")}
    if on_bad not in ("raise", "drop"):
        raise ArgumentError(f"on_bad must be 'raise' or 'drop', not {on_bad!r}")
    for model in csp_models:
        if model.n_channels != rec.n_channels:
            raise ArgumentError("CSP model channel count differs from recording")
    n_comp = {m.n_components for m in csp_models}
    if len(n_comp) != 1:
        raise ArgumentError("all CSP models must have the same n_components")

    def work(i):
        try:
            return _trial_features(i, rec.trials[i].samples, rec.sampling_rate_hz,
                                   csp_models, welch_cfg, bands)
        except BadTrialError as exc:
            if on_bad == "raise":
                raise
            return exc

    idx = range(len(rec.trials))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, idx))
    else:
        results = [work(i) for i in idx]
    rows, labels, bad = [], [], []
    for i, res in enumerate(results):
        if isinstance(res, BadTrialError):
            bad.append(i)
            continue
        rows.append(res)
        labels.append(rec.trials[i].label)
    names = feature_names(len(csp_models), n_comp.pop())
    values = np.array(rows, dtype=np.float64).reshape(len(rows), len(names))
    return FeatureMatrix(values, names, np.array(labels, dtype=int), [], bad)


def fit_normalizer(values, method):
    values = np.asarray(values, dtype=np.float64)
    if method == "minmax":
        center = values.min(axis=0)
        scale = values.max(axis=0) - center
    elif method == "zscore":
        center = values.mean(axis=0)
        scale = values.std(axis=0)
    else:
        raise ArgumentError(f"unknown normalization {method!r}")
    constant = ~(scale > 0)
    scale = np.where(constant, 1.0, scale)
    return NormalizationParams(method, center, scale, constant)


def apply_normalizer(values, params):
    values = np.asarray(values, dtype=np.float64)
    if values.shape[1] != params.center.shape[0]:
        raise ArgumentError(f"feature count {values.shape[1]} does not match "
                            f"normalizer ({params.center.shape[0]})")
    out = (values - params.center) / params.scale
    out[:, params.constant] = 0.0
    return out


def normalize(fm, method="zscore", mode="fit", state=None):
    """Normalize features per column.

    ``mode="fit"`` estimates statistics from ``fm`` and records them by
    appending to ``norm_state``; ``mode="apply"`` replays ``state`` (or the
    chain already stored on ``fm``) so test data reuses training statistics.
    Constant columns map to 0 and are flagged in the parameters.
    """
    if mode == "fit":
        params = fit_normalizer(fm.values, method)
        return replace(fm, values=apply_normalizer(fm.values, params),
                       norm_state=list(fm.norm_state) + [params])
    if mode == "apply":
        chain = state if state is not None else fm.norm_state
        if isinstance(chain, NormalizationParams):
            chain = [chain]
        if not chain:
            raise StateError("normalize(mode='apply') requires fitted parameters")
        values = fm.values
        for params in chain:
            values = apply_normalizer(values, params)
        return replace(fm, values=values, norm_state=list(chain))
    raise ArgumentError(f"mode must be 'fit' or 'apply', not {mode!r}")


def write_feature_csv(fm, path, comment=None):
    """CSV with a header of feature names plus ``label``; ``#`` comment first."""
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(fm.feature_names) + ["label"])
        for row, lab in zip(fm.values, fm.labels):
            w.writerow([repr(float(v)) for v in row] + [int(lab)])


def read_feature_csv(path):
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows or rows[0][-1] != "label":
        raise FormatError(f"{path}: header must end with 'label'")
    names = rows[0][:-1]
    body = rows[1:]
    try:
        values = np.array([[float(v) for v in r[:-1]] for r in body])
        labels = np.array([int(r[-1]) for r in body], dtype=int)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    return FeatureMatrix(values.reshape(len(body), len(names)), names, labels)
