"""EEG recording model, file ingestion, epoching, filtering and synthetic data.

Recordings live on disk as a JSON manifest plus one CSV per trial::

    {"sampling_rate_hz": 250.0,
     "channel_names": ["C3", "Cz", "C4"],
     "class_labels": ["left", "right"],
     "trials": [{"file": "trials/t000.csv", "label": 0, "onset_s": 0.0}, ...]}

Trial files carry a header row of channel names and one row per sample.
"""
import csv
import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import _rng
from .exceptions import ArgumentError, FormatError, RangeError

#: Conventional EEG rhythm edges in Hz.
BANDS = {
    "delta": (0.5, 4.0),
    "theta": (4.0, 8.0),
    "alpha": (8.0, 12.0),
    "beta": (12.0, 25.0),
    "gamma": (25.0, 45.0),
}


@dataclass(frozen=True)
class FrequencyBand:
    name: str
    lo_hz: float
    hi_hz: float

    def __post_init__(self):
        if not (0 < self.lo_hz < self.hi_hz):
            raise ArgumentError(
                f"band {self.name!r}: need 0 < lo_hz < hi_hz, got "
                f"({self.lo_hz}, {self.hi_hz})")

    @classmethod
    def named(cls, name):
        lo, hi = BANDS[name]
        return cls(name, lo, hi)

    def check_nyquist(self, fs):
        if self.hi_hz >= fs / 2:
            raise ArgumentError(
                f"band {self.name!r} upper edge {self.hi_hz} Hz is not below "
                f"Nyquist ({fs / 2} Hz)")


@dataclass
class Trial:
    """One cue-locked trial.

    ``samples`` has shape (n_channels, n_times) in microvolts and
    ``onset_s`` is the cue time relative to sample 0.
    """
    samples: np.ndarray
    label: int
    onset_s: float = 0.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 2:
            raise FormatError("trial samples must be a 2D (channels x time) array")
        if not np.all(np.isfinite(self.samples)):
            raise FormatError("trial samples contain non-finite values")

    @property
    def n_times(self):
        return self.samples.shape[1]


@dataclass
class EegRecording:
    sampling_rate_hz: float
    channel_names: list
    trials: list
    class_labels: list

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.sampling_rate_hz > 0:
            raise FormatError("sampling_rate_hz must be positive")
        n_ch = len(self.channel_names)
        n_cls = len(self.class_labels)
        for i, tr in enumerate(self.trials):
            if tr.samples.shape[0] != n_ch:
                raise FormatError(
                    f"trial {i}: {tr.samples.shape[0]} channels, expected {n_ch}")
            if tr.n_times < 2:
                raise FormatError(f"trial {i}: fewer than 2 samples")
            if not 0 <= tr.label < n_cls:
                raise FormatError(
                    f"trial {i}: label {tr.label} outside 0..{n_cls - 1}")

    @property
    def n_channels(self):
        return len(self.channel_names)

    @property
    def n_classes(self):
        return len(self.class_labels)

    @property
    def labels(self):
        return np.array([t.label for t in self.trials], dtype=int)

    def subset(self, indices):
        return replace(self, trials=[self.trials[i] for i in indices])


# --------------------------------------------------------------------------
# File I/O
# --------------------------------------------------------------------------

def _read_trial_csv(path, trial_index, channel_names):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(ln for ln in fh if not ln.startswith("#")))
    except FileNotFoundError:
        raise FileNotFoundError(f"trial file not found: {path}") from None
    if not rows:
        raise FormatError(f"trial {trial_index}: empty file {path}")
    header, body = rows[0], rows[1:]
    if len(header) != len(channel_names):
        raise FormatError(
            f"trial {trial_index}: {len(header)} columns in {path}, "
            f"channel_names lists {len(channel_names)}")
    if len(body) < 2:
        raise FormatError(f"trial {trial_index}: fewer than 2 sample rows")
    try:
        data = np.array([[float(v) for v in row] for row in body])
    except ValueError as exc:
        raise FormatError(f"trial {trial_index}: {exc}") from None
    if data.ndim != 2 or data.shape[1] != len(channel_names):
        raise FormatError(f"trial {trial_index}: ragged rows in {path}")
    if not np.all(np.isfinite(data)):
        raise FormatError(f"trial {trial_index}: non-finite sample in {path}")
    return data.T


def load_recording(manifest_path):
    """Load and validate a recording from its JSON manifest.

    Trial file paths are resolved relative to the manifest's directory.
    """
    manifest_path = os.fspath(manifest_path)
    try:
        with open(manifest_path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise FileNotFoundError(f"manifest not found: {manifest_path}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{manifest_path}: invalid JSON ({exc})") from None
    for key in ("sampling_rate_hz", "channel_names", "class_labels", "trials"):
        if key not in doc:
            raise FormatError(f"{manifest_path}: missing key {key!r}")
    base = os.path.dirname(os.path.abspath(manifest_path))
    names = list(doc["channel_names"])
    trials = []
    for i, entry in enumerate(doc["trials"]):
        path = os.path.join(base, entry["file"])
        samples = _read_trial_csv(path, i, names)
        trials.append(Trial(samples, int(entry["label"]), float(entry["onset_s"])))
    return EegRecording(float(doc["sampling_rate_hz"]), names, trials,
                        list(doc["class_labels"]))


def write_recording(rec, manifest_path, trial_dir="trials", extra=None, comment=None):
    """Write ``rec`` as a manifest plus per-trial CSVs.

    Floats are written with ``repr`` so a reload is bit-exact.  ``extra``
    entries are merged into the manifest (e.g. provenance fields) and
    ``comment`` becomes a leading ``#`` line of every trial CSV.
    """
    manifest_path = os.fspath(manifest_path)
    base = os.path.dirname(os.path.abspath(manifest_path))
    os.makedirs(os.path.join(base, trial_dir), exist_ok=True)
    width = max(3, len(str(len(rec.trials))))
    entries = []
    for i, tr in enumerate(rec.trials):
        rel = f"{trial_dir}/trial_{i:0{width}d}.csv"
        with open(os.path.join(base, rel), "w", newline="") as fh:
            if comment:
                fh.write(f"# {comment}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(rec.channel_names)
            for row in tr.samples.T:
                w.writerow([repr(float(v)) for v in row])
        entries.append({"file": rel, "label": int(tr.label),
                        "onset_s": float(tr.onset_s)})
    doc = {"sampling_rate_hz": float(rec.sampling_rate_hz),
           "channel_names": list(rec.channel_names),
           "class_labels": list(rec.class_labels),
           "trials": entries}
    if extra:
        doc.update(extra)
    with open(manifest_path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    return manifest_path


# --------------------------------------------------------------------------
# Epoching and filtering
# --------------------------------------------------------------------------

def epoch_trials(rec, t_min_s, t_max_s):
    """Crop each trial to ``[t_min_s, t_max_s]`` relative to its onset.

    Both endpoints are inclusive, so the sample count is
    ``round(fs * (t_max_s - t_min_s)) + 1`` (1501 for 1-7 s at 250 Hz).
    """
    if not t_min_s < t_max_s:
        raise ArgumentError(f"t_min_s ({t_min_s}) must be < t_max_s ({t_max_s})")
    fs = rec.sampling_rate_hz
    n = int(round(fs * (t_max_s - t_min_s))) + 1
    out = []
    for i, tr in enumerate(rec.trials):
        start = int(round(fs * (tr.onset_s + t_min_s)))
        stop = start + n
        if start < 0 or stop > tr.n_times:
            raise RangeError(
                f"trial {i}: window [{t_min_s}, {t_max_s}] s needs samples "
                f"{start}..{stop - 1}, trial has {tr.n_times}")
        out.append(Trial(tr.samples[:, start:stop].copy(), tr.label, 0.0))
    return replace(rec, trials=out)


def bandpass_kernel(band, fs):
    """Hamming-windowed sinc band-pass kernel (odd length, linear phase).

    Length is the larger of ``4 fs / lo`` and ``8 fs / (hi - lo)`` rounded
    up to odd; the second term keeps narrow bands flat in the passband.
    """
    band.check_nyquist(fs)
    n = max(4.0 * fs / band.lo_hz, 8.0 * fs / (band.hi_hz - band.lo_hz))
    n = int(math.ceil(n))
    if n % 2 == 0:
        n += 1
    m = np.arange(n) - (n - 1) / 2

    def lowpass(fc):
        return 2.0 * fc / fs * np.sinc(2.0 * fc / fs * m)

    return (lowpass(band.hi_hz) - lowpass(band.lo_hz)) * np.hamming(n)


def filter_signal(x, kernel):
    """Zero-phase FIR filtering along the last axis of ``x``.

    The signal is reflect-padded by one kernel length on each side, filtered
    forward, reversed, filtered again and reversed back.
    """
    x = np.asarray(x, dtype=np.float64)
    pad = len(kernel)
    widths = [(0, 0)] * (x.ndim - 1) + [(pad, pad)]
    xp = np.pad(x, widths, mode="reflect")

    def conv(a):
        return np.apply_along_axis(np.convolve, -1, a, kernel, mode="same")

    y = conv(xp)
    y = conv(y[..., ::-1])[..., ::-1]
    return y[..., pad:pad + x.shape[-1]]


def bandpass_filter(rec, band):
    """Return a band-pass filtered copy of ``rec`` (zero phase, same length)."""
    band.check_nyquist(rec.sampling_rate_hz)
    h = bandpass_kernel(band, rec.sampling_rate_hz)
    trials = [Trial(filter_signal(t.samples, h), t.label, t.onset_s)
              for t in rec.trials]
    return replace(rec, trials=trials)


# --------------------------------------------------------------------------
# Synthetic ground truth
# --------------------------------------------------------------------------

@dataclass
class SyntheticSpec:
    """Parameters of a planted-source EEG simulation.

    ``class_band_gains[c, k]`` multiplies the variance of source ``k`` in
    ``band`` for trials of class ``c``.
    """
    n_channels: int
    n_classes: int
    trials_per_class: int
    fs_hz: float
    trial_len_s: float
    mixing_matrix: np.ndarray
    class_band_gains: np.ndarray
    noise_scale: float
    seed: int
    band: FrequencyBand = field(default_factory=lambda: FrequencyBand.named("alpha"))
    onset_s: float = 0.0

    def __post_init__(self):
        self.mixing_matrix = np.asarray(self.mixing_matrix, dtype=np.float64)
        self.class_band_gains = np.asarray(self.class_band_gains, dtype=np.float64)

    @property
    def n_sources(self):
        return self.mixing_matrix.shape[1]


@dataclass
class GroundTruth:
    mixing_matrix: np.ndarray
    class_sources: list
    seed: int
    sources: list = field(default=None, repr=False)

    def to_json(self):
        return {"mixing_matrix": self.mixing_matrix.tolist(),
                "class_sources": [list(map(int, s)) for s in self.class_sources],
                "seed": int(self.seed)}

    def discriminative_filter(self, class_index):
        """Spatial filter extracting the first planted source of a class.

        For a square mixing matrix this is the matching row of its inverse;
        otherwise the pseudo-inverse row.
        """
        k = self.class_sources[class_index][0]
        return np.linalg.pinv(self.mixing_matrix)[k]


def default_synthetic_spec(n_channels=8, n_classes=4, trials_per_class=50,
                           fs_hz=250.0, trial_len_s=4.0, gain=4.0,
                           noise_scale=0.1, seed=0):
    """Class ``c`` boosts source ``c`` by ``gain``; the mixing is random."""
    if n_classes > n_channels:
        raise ArgumentError("need at least one source channel per class")
    rng = _rng.stream(seed, "synthetic-mixing")
    mixing = rng.normal(size=(n_channels, n_channels))
    gains = np.ones((n_classes, n_channels))
    for c in range(n_classes):
        gains[c, c] = gain
    return SyntheticSpec(n_channels, n_classes, trials_per_class, fs_hz,
                         trial_len_s, mixing, gains, noise_scale, seed)


def band_limited_noise(rng, n, fs, band):
    """Gaussian noise confined to ``band`` with unit expected variance."""
    freqs = np.fft.rfftfreq(n, 1.0 / fs)
    sel = (freqs >= band.lo_hz) & (freqs <= band.hi_hz)
    if n % 2 == 0:
        sel[-1] = False
    sel[0] = False
    m = int(sel.sum())
    if m == 0:
        raise ArgumentError(f"band {band.name!r} contains no FFT bins for n={n}")
    spec = np.zeros(len(freqs), dtype=complex)
    spec[sel] = rng.normal(size=m) + 1j * rng.normal(size=m)
    # E[sum x^2] = (1/n) * 2 * sum E|X_k|^2 = 4m/n  ->  unit variance scale
    return np.fft.irfft(spec, n) * (n / (2.0 * math.sqrt(m)))


def generate_synthetic(spec):
    """Simulate a recording from planted, class-modulated band-limited sources.

    Returns ``(recording, ground_truth)``; identical specs give bitwise
    identical output.
    """
    A = spec.mixing_matrix
    if A.ndim != 2 or A.shape[0] != spec.n_channels:
        raise ArgumentError("mixing_matrix must be n_channels x n_sources")
    if np.linalg.matrix_rank(A) < A.shape[1]:
        raise ArgumentError("mixing_matrix must have full column rank")
    G = spec.class_band_gains
    if G.shape != (spec.n_classes, spec.n_sources):
        raise ArgumentError("class_band_gains must be n_classes x n_sources")
    if np.any(G < 0):
        raise ArgumentError("class_band_gains must be non-negative")
    spec.band.check_nyquist(spec.fs_hz)
    n = int(round(spec.trial_len_s * spec.fs_hz))
    if n < 2:
        raise ArgumentError("trial_len_s too short")

    rng = _rng.stream(spec.seed, "synthetic-trials")
    trials, sources = [], []
    for rep in range(spec.trials_per_class):
        for c in range(spec.n_classes):
            s = np.stack([band_limited_noise(rng, n, spec.fs_hz, spec.band)
                          for _ in range(spec.n_sources)])
            s *= np.sqrt(G[c])[:, None]
            x = A @ s
            if spec.noise_scale > 0:
                x = x + spec.noise_scale * rng.normal(size=x.shape)
            trials.append(Trial(x, c, spec.onset_s))
            sources.append(s)

    class_sources = []
    for c in range(spec.n_classes):
        others = np.delete(G, c, axis=0)
        ref = others.mean(axis=0) if len(others) else np.ones(spec.n_sources)
        class_sources.append([int(k) for k in np.flatnonzero(G[c] > ref)])
    rec = EegRecording(spec.fs_hz, [f"ch{i}" for i in range(spec.n_channels)],
                       trials, [f"class{c}" for c in range(spec.n_classes)])
    return rec, GroundTruth(A.copy(), class_sources, spec.seed, sources)


def write_ground_truth(gt, path):
    with open(path, "w") as fh:
        json.dump(gt.to_json(), fh, indent=1)
        fh.write("\n")
