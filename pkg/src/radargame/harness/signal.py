"""Spectrum and pulse-compression diagnostics of a transmit code."""
from __future__ import annotations

import numpy as np

from ..model import Waveform

PSD_POINTS = 1024
# autocorrelation magnitudes are floored here so exact nulls stay finite in dB
DB_FLOOR = 1e-15


def psd(w: Waveform, n_points: int = PSD_POINTS) -> tuple[np.ndarray, np.ndarray]:
    """Frequencies ``g / n_points`` and ``(1/L) sum_n |DFT of row n|^2`` by zero-padded FFT."""
    S = w.matrix
    spec = np.fft.fft(S, n=n_points, axis=1)
    p = np.sum(np.abs(spec) ** 2, axis=0) / S.shape[1]
    return np.arange(n_points) / n_points, p


def band_mask(freqs: np.ndarray, bands) -> np.ndarray:
    mask = np.zeros(freqs.shape, dtype=bool)
    for b in bands:
        mask |= (freqs >= b.f1) & (freqs <= b.f2)
    return mask


def notch_depth_db(w: Waveform, bands, n_points: int = PSD_POINTS) -> float:
    """Mean pass-band PSD over mean stop-band PSD, in dB."""
    f, p = psd(w, n_points)
    stop = band_mask(f, bands)
    return float(10 * np.log10(p[~stop].mean() / p[stop].mean()))


def autocorrelation(w: Waveform, reference: Waveform | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Lags ``-(L-1)..L-1`` and per-transmitter ``r_n(k) = sum_l S(n,l) conj(S'(n,l-k))``.

    ``S'`` is the code itself, or ``reference`` for cross-correlation.
    """
    S = w.matrix
    R = S if reference is None else reference.matrix
    L = S.shape[1]
    lags = np.arange(-(L - 1), L)
    out = np.empty((S.shape[0], lags.size), dtype=complex)
    for n in range(S.shape[0]):
        # np.correlate(a, v)[k] = sum_l a[l + k] conj(v[l]), 'full' runs k over -(L-1)..L-1
        out[n] = np.correlate(S[n], R[n], mode="full")
    return lags, out


def compression_db(r: np.ndarray, lags: np.ndarray) -> np.ndarray:
    """``20 log10 |r(k)| / |r(0)|`` per row."""
    zero = np.abs(r[:, lags == 0])
    mag = np.abs(r) / np.where(zero > 0, zero, 1.0)
    return 20 * np.log10(np.maximum(mag, DB_FLOOR))


def peak_sidelobe_db(w: Waveform) -> np.ndarray:
    lags, r = autocorrelation(w)
    db = compression_db(r, lags)
    return db[:, lags != 0].max(axis=1)
