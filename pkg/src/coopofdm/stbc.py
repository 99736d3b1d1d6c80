"""Alamouti space-time coding across subcarrier pairs, OFDM framing, pilots
and composite-channel estimation.

Subcarriers are processed in groups of P = 2.  The Alamouti matrix for the
group starting at bin k is [[S_k, S_{k+1}], [-conj(S_{k+1}), conj(S_k)]]; each
relay transmits that matrix times column k of its virtual channel matrix, so
bins k and k+1 carry one space-time codeword.  The receiver sees the composite
response H(n, k) = sum_u R_u(n, k) * H_u(k), which is what both estimators
target.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dsp import RngStream, fft, ifft, linear_convolve
from .vchan import VirtualChannelMatrix

DEFAULT_PILOT_SEED = 0x5EED


@dataclass(frozen=True)
class StbcConfig:
    """OFDM and space-time framing parameters."""

    subcarriers: int = 128
    group_size: int = 2
    code_dims: int = 2
    cp_len: int = 16
    block_symbols: int = 20
    pilot_symbols: int = 2
    vchan_taps: int = 12
    pilot_seed: int = DEFAULT_PILOT_SEED

    @property
    def data_symbols(self) -> int:
        return self.block_symbols - self.pilot_symbols

    @property
    def coded_bits_per_block(self) -> int:
        return self.data_symbols * self.subcarriers * 2

    def validate(self) -> None:
        k = self.subcarriers
        if k < 2 or (k & (k - 1)) != 0:
            raise ValueError("subcarrier count must be a power of two")
        if self.group_size != 2 or self.code_dims != 2:
            raise ValueError("the space-time code is the 2x2 Alamouti scheme")
        if k % self.group_size != 0 or k % self.code_dims != 0:
            raise ValueError("subcarrier count must divide into groups and dimensions")
        if self.cp_len < 0 or self.cp_len >= k:
            raise ValueError("cyclic prefix must be shorter than the symbol")
        if self.pilot_symbols < 1:
            raise ValueError("need at least one pilot symbol")
        if self.block_symbols <= self.pilot_symbols:
            raise ValueError("block must contain data symbols after the pilots")
        if not (1 <= self.vchan_taps <= k):
            raise ValueError("virtual channel taps must fit within one symbol")


@dataclass(frozen=True)
class CompositeChannel:
    """Composite response per space-time dimension; taps kept when compact."""

    freq: np.ndarray
    taps: np.ndarray | None = None


def alamouti_matrix(symbols: np.ndarray) -> np.ndarray:
    """2x2 Alamouti codeword for one symbol pair (rows are bins k, k+1)."""
    s = np.asarray(symbols)
    if s.shape != (2,):
        raise ValueError("expected exactly two symbols")
    return np.array(
        [[s[0], s[1]], [-np.conj(s[1]), np.conj(s[0])]]
    )


def stbc_encode(symbols: np.ndarray, vchan: VirtualChannelMatrix | np.ndarray) -> np.ndarray:
    """Transmit spectrum for one relay: per group, Alamouti matrix times the
    virtual channel column at the group start.

    symbols has shape (..., K) with K even; leading axes batch whole OFDM
    symbols.  Only virtual channel columns at even bins are used.
    """
    freq = vchan.freq if isinstance(vchan, VirtualChannelMatrix) else np.asarray(vchan)
    s = np.asarray(symbols)
    k = s.shape[-1]
    if k % 2 != 0:
        raise ValueError("subcarrier count must be even")
    if freq.shape != (2, k):
        raise ValueError("virtual channel must be 2 x subcarriers")
    s0 = s[..., 0::2]
    s1 = s[..., 1::2]
    r0 = freq[0, 0::2]
    r1 = freq[1, 0::2]
    out = np.empty_like(s, dtype=complex)
    out[..., 0::2] = s0 * r0 + s1 * r1
    out[..., 1::2] = -np.conj(s1) * r0 + np.conj(s0) * r1
    return out


def ofdm_modulate(spectrum: np.ndarray, cp_len: int) -> np.ndarray:
    """Inverse transform plus cyclic prefix of cp_len samples."""
    time = ifft(spectrum)
    if cp_len == 0:
        return time
    if not (0 < cp_len < time.shape[-1]):
        raise ValueError("cyclic prefix must be shorter than the symbol")
    return np.concatenate([time[..., -cp_len:], time], axis=-1)


def ofdm_demodulate(samples: np.ndarray, subcarriers: int, cp_len: int) -> np.ndarray:
    """Strip the prefix and transform back to subcarrier values."""
    samples = np.asarray(samples)
    if samples.shape[-1] != subcarriers + cp_len:
        raise ValueError("sample count does not match symbol plus prefix")
    return fft(samples[..., cp_len:])


def make_pilot_tones(subcarriers: int, seed: int = DEFAULT_PILOT_SEED) -> np.ndarray:
    """Fixed pseudo-random BPSK training sequence shared by all relays."""
    bits = RngStream(seed).generator().integers(0, 2, size=subcarriers)
    return (1.0 - 2.0 * bits).astype(complex)


def build_pilot_ls(
    tones: np.ndarray, vchan_freq: np.ndarray, group_size: int
) -> np.ndarray:
    """Pilot spectrum that exposes one dimension per tone.

    Within the group starting at bin k, bin k+n carries tones[k+n] times the
    virtual channel entry (n, k).  If there are fewer dimensions than group
    members the remaining bins stay zero (not transmitted).
    """
    tones = np.asarray(tones)
    vchan_freq = np.asarray(vchan_freq)
    k = tones.shape[0]
    n_dims = vchan_freq.shape[0]
    if vchan_freq.shape[1] != k or k % group_size != 0 or n_dims > group_size:
        raise ValueError("pilot layout needs dims <= group size dividing the bins")
    starts = np.arange(0, k, group_size)
    spectrum = np.zeros(k, dtype=complex)
    for n in range(n_dims):
        spectrum[starts + n] = tones[starts + n] * vchan_freq[n, starts]
    return spectrum


def build_pilot_cyclic(tones: np.ndarray, vchan_freq: np.ndarray) -> np.ndarray:
    """Pilot spectrum with one cyclically delayed copy per dimension.

    Dimension n transmits tones[k] * exp(-2j*pi*k*n/N) on every bin, which
    shifts its composite response to taps around n*K/N at the receiver.
    """
    tones = np.asarray(tones)
    vchan_freq = np.asarray(vchan_freq)
    k = tones.shape[0]
    n_dims = vchan_freq.shape[0]
    if vchan_freq.shape[1] != k or k % n_dims != 0:
        raise ValueError("bin count must be a multiple of the dimension count")
    bins = np.arange(k)
    spectrum = np.zeros(k, dtype=complex)
    for n in range(n_dims):
        spectrum += tones * np.exp(-2j * np.pi * bins * n / n_dims) * vchan_freq[n]
    return spectrum


def composite_channel(
    vchans: Sequence[VirtualChannelMatrix], channels: np.ndarray
) -> CompositeChannel:
    """True composite response: H(n, k) = sum_u R_u(n, k) * H_u(k).

    When every virtual channel carries taps, the matching time-domain rows
    sum_u conv(r_u(n, .), h_u) are kept as the ground truth for estimator
    checks.
    """
    channels = np.asarray(channels)
    if len(vchans) != channels.shape[0]:
        raise ValueError("need one tap vector per relay")
    n_dims, k = vchans[0].freq.shape
    pad = np.zeros((channels.shape[0], k), dtype=complex)
    pad[:, : channels.shape[1]] = channels
    h_freq = fft(pad)
    freq = np.zeros((n_dims, k), dtype=complex)
    for vc, hf in zip(vchans, h_freq):
        freq += vc.freq * hf
    taps = None
    if all(vc.taps is not None for vc in vchans):
        t_len = max(vc.taps.shape[1] for vc in vchans) + channels.shape[1] - 1
        taps = np.zeros((n_dims, t_len), dtype=complex)
        for vc, h in zip(vchans, channels):
            for n in range(n_dims):
                conv = linear_convolve(vc.taps[n], h)
                taps[n, : conv.size] += conv
    return CompositeChannel(freq=freq, taps=taps)


def estimate_ls(
    pilot_spectra: np.ndarray,
    tones: np.ndarray,
    cfg: StbcConfig,
    denoise: bool = True,
) -> CompositeChannel:
    """Least-squares estimation from per-dimension pilot tones.

    Per pilot symbol, the tone at bin k+n measures dimension n of the group
    starting at k.  Estimates are averaged over the pilot symbols, linearly
    interpolated (real and imaginary parts) from the group starts to all bins
    with constant extrapolation past the last tone, and, when denoise is set,
    cleaned up in the time domain by zeroing every tap beyond vchan_taps +
    cp_len.  Denoising assumes a compact composite response, so it is only
    meaningful for the all-pass scheme.
    """
    spectra = np.atleast_2d(np.asarray(pilot_spectra))
    k = cfg.subcarriers
    p = cfg.group_size
    n_dims = cfg.code_dims
    if spectra.shape[1] != k:
        raise ValueError("pilot spectra must span all subcarriers")
    mean_spec = spectra.mean(axis=0)
    starts = np.arange(0, k, p)
    bins = np.arange(k)
    freq = np.empty((n_dims, k), dtype=complex)
    for n in range(n_dims):
        samples = mean_spec[starts + n] / tones[starts + n]
        freq[n] = np.interp(bins, starts, samples.real) + 1j * np.interp(
            bins, starts, samples.imag
        )
    if denoise:
        keep = cfg.vchan_taps + cfg.cp_len
        taps = ifft(freq)
        taps[:, keep + 1 :] = 0.0
        freq = fft(taps)
    return CompositeChannel(freq=freq, taps=None)


def estimate_cyclic(
    pilot_spectra: np.ndarray, tones: np.ndarray, cfg: StbcConfig
) -> CompositeChannel:
    """Estimation from cyclically delayed pilots.

    Dividing the averaged pilot spectrum by the tones yields the superposition
    of all dimensions' impulse responses, each shifted to taps n*K/N.  As long
    as vchan_taps + cp_len <= K/N those segments cannot overlap, so slicing
    them apart recovers every dimension exactly in the noiseless case.
    """
    spectra = np.atleast_2d(np.asarray(pilot_spectra))
    k = cfg.subcarriers
    n_dims = cfg.code_dims
    seg = cfg.vchan_taps + cfg.cp_len
    if seg > k // n_dims:
        raise ValueError(
            "cyclic-delay pilots need vchan_taps + cp_len <= subcarriers / dims"
        )
    if spectra.shape[1] != k:
        raise ValueError("pilot spectra must span all subcarriers")
    mean_spec = spectra.mean(axis=0)
    ht = ifft(mean_spec / tones)
    taps = np.empty((n_dims, seg), dtype=complex)
    padded = np.zeros((n_dims, k), dtype=complex)
    for n in range(n_dims):
        taps[n] = ht[n * (k // n_dims) : n * (k // n_dims) + seg]
        padded[n, :seg] = taps[n]
    return CompositeChannel(freq=fft(padded), taps=taps)


def alamouti_combine(received: np.ndarray, comp: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Combine one group's received pair using the composite column.

    received and comp have shape (..., 2): bins (k, k+1) and dimensions
    (0, 1) at the group start.  Returns the combined symbol estimates
    (gamma * S plus noise) and the diversity gain gamma = |H0|^2 + |H1|^2.
    A zero gamma marks an erasure: both estimates are 0 and the caller must
    map the group to zero LLRs.
    """
    y = np.asarray(received)
    h = np.asarray(comp)
    if y.shape[-1] != 2 or h.shape[-1] != 2:
        raise ValueError("combining works on bin pairs and dimension pairs")
    y0, y1 = y[..., 0], y[..., 1]
    h0, h1 = h[..., 0], h[..., 1]
    s0 = np.conj(h0) * y0 + h1 * np.conj(y1)
    s1 = np.conj(h1) * y0 - h0 * np.conj(y1)
    gamma = np.abs(h0) ** 2 + np.abs(h1) ** 2
    return np.stack([s0, s1], axis=-1), gamma
