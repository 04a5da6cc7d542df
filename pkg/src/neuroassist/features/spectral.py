"""Welch power spectral density with median or mean segment averaging."""
from dataclasses import dataclass

import numpy as np

from ..exceptions import ArgumentError


@dataclass(frozen=True)
class PsdEstimate:
    freqs_hz: np.ndarray
    power: np.ndarray
    nfft: int
    segment_len: int
    overlap_frac: float
    averaging: str


@dataclass(frozen=True)
class WelchConfig:
    """Welch settings; ``None`` fields resolve against the signal length.

    ``fs_override`` replaces the recording's sampling rate when set.
    """
    segment_len: int = None
    overlap_frac: float = 0.5
    nfft: int = None
    averaging: str = "median"
    fs_override: float = None

    def resolve(self, n_samples, fs):
        seg = self.segment_len if self.segment_len is not None else min(256, n_samples)
        seg = min(seg, n_samples)
        nfft = self.nfft if self.nfft is not None else seg
        nfft = max(nfft, seg)
        fs = self.fs_override if self.fs_override is not None else fs
        return seg, nfft, fs


def hann(n):
    """Periodic Hann window of length ``n``."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def segment_starts(n_samples, segment_len, overlap_frac):
    noverlap = int(np.floor(overlap_frac * segment_len))
    step = segment_len - noverlap
    return np.arange(0, n_samples - segment_len + 1, step)


def modified_periodograms(x, fs, segment_len, overlap_frac, nfft):
    """One-sided, density-scaled periodogram of every Hann-windowed segment.

    Each segment's DFT power is divided by ``fs * sum(window**2)``; interior
    bins (excluding DC and, for even ``nfft``, Nyquist) are doubled.
    Returns ``(freqs, P)`` with ``P`` of shape (n_segments, nfft // 2 + 1).
    """
    x = np.asarray(x, dtype=np.float64)
    win = hann(segment_len)
    starts = segment_starts(len(x), segment_len, overlap_frac)
    segs = np.stack([x[s:s + segment_len] for s in starts]) * win
    spec = np.fft.rfft(segs, n=nfft, axis=-1)
    P = (spec.real ** 2 + spec.imag ** 2) / (fs * np.sum(win ** 2))
    if nfft % 2 == 0:
        P[:, 1:-1] *= 2.0
    else:
        P[:, 1:] *= 2.0
    return np.fft.rfftfreq(nfft, 1.0 / fs), P


def welch_psd(x, fs, segment_len=None, overlap_frac=0.5, nfft=None,
              averaging="median"):
    """Welch PSD estimate of a 1D signal.

    Segment periodograms are combined by the element-wise median (default,
    no bias correction) or the arithmetic mean.

    Parameters
    ----------
    x : array_like, shape (n,)
    fs : float
        Sampling rate in Hz.
    segment_len : int, optional
        Samples per segment; defaults to ``min(256, n)``.
    overlap_frac : float
        Fractional overlap of consecutive segments, in ``[0, 1)``.
    nfft : int, optional
        FFT length (zero padding); defaults to ``segment_len``.
    averaging : {"median", "mean"}

    Returns
    -------
    PsdEstimate
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ArgumentError("welch_psd expects a 1D signal")
    n = len(x)
    if segment_len is None:
        segment_len = min(256, n)
    if nfft is None:
        nfft = segment_len
    if segment_len < 1 or segment_len > n:
        raise ArgumentError(f"segment_len {segment_len} must be in 1..{n}")
    if nfft < segment_len:
        raise ArgumentError(f"nfft {nfft} < segment_len {segment_len}")
    if not 0 <= overlap_frac < 1:
        raise ArgumentError("overlap_frac must lie in [0, 1)")
    if averaging not in ("median", "mean"):
        raise ArgumentError(f"unknown averaging {averaging!r}")
    freqs, P = modified_periodograms(x, fs, segment_len, overlap_frac, nfft)
    power = np.median(P, axis=0) if averaging == "median" else P.mean(axis=0)
    return PsdEstimate(freqs, power, int(nfft), int(segment_len),
                       float(overlap_frac), averaging)


def band_power(psd, band):
    """Trapezoidal integral of ``psd.power`` over ``[band.lo_hz, band.hi_hz]``.

    The spectrum is linearly interpolated at the band edges.
    """
    f, p = psd.freqs_hz, psd.power
    if band.lo_hz < f[0] or band.hi_hz > f[-1]:
        raise ArgumentError(
            f"band {band.name!r} [{band.lo_hz}, {band.hi_hz}] Hz outside PSD "
            f"range [{f[0]}, {f[-1]}] Hz")
    inner = (f > band.lo_hz) & (f < band.hi_hz)
    fx = np.concatenate([[band.lo_hz], f[inner], [band.hi_hz]])
    px = np.interp(fx, f, p)
    return float(np.sum(0.5 * (px[1:] + px[:-1]) * np.diff(fx)))
