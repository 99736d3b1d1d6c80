"""Virtual transmit channels: truncated all-pass cascades and block phase dithering.

Each relay shapes its transmit signal with one synthetic channel per space-time
dimension.  The all-pass construction draws M random poles on a circle of
radius pole_modulus, cascades the first-order sections, truncates the impulse
response to num_taps samples and takes its DFT.  The dithering construction
skips the time domain entirely and assigns one random phase per group of
subcarriers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsp import fft, linear_convolve


@dataclass(frozen=True)
class ApfConfig:
    """All-pass cascade parameters: filter order, pole radius, kept taps."""

    order: int = 4
    pole_modulus: float = 0.7
    num_taps: int = 12

    def validate(self) -> None:
        if self.order < 1:
            raise ValueError("all-pass order must be at least 1")
        if not (0.0 < self.pole_modulus < 1.0):
            raise ValueError("pole modulus must lie strictly inside (0, 1)")
        if self.num_taps < 1:
            raise ValueError("truncation length must be at least 1")


@dataclass(frozen=True)
class VirtualChannelMatrix:
    """Per-relay virtual channel: frequency response rows plus optional taps.

    freq has shape (n_dims, n_bins); row n is the response applied to
    space-time dimension n.  taps is (n_dims, num_taps) for the all-pass
    scheme and None for phase dithering, which has no compact time support.
    """

    freq: np.ndarray
    taps: np.ndarray | None
    scheme: str


def sample_poles(order: int, modulus: float, rng: np.random.Generator) -> np.ndarray:
    """Draw poles with fixed modulus and i.i.d. angles uniform on [0, 2*pi)."""
    if order < 1:
        raise ValueError("all-pass order must be at least 1")
    if not (0.0 < modulus < 1.0):
        raise ValueError("pole modulus must lie strictly inside (0, 1)")
    angles = rng.uniform(0.0, 2.0 * np.pi, size=order)
    return modulus * np.exp(1j * angles)


def apf_first_order_taps(pole: complex, length: int) -> np.ndarray:
    """First length impulse-response samples of (conj(p) - z^-1)/(1 - p z^-1).

    The closed form is g(0) = -conj(p) and g(i) = p**i * (1/p - conj(p))
    for i >= 1.
    """
    if length < 1:
        raise ValueError("length must be at least 1")
    if not (0.0 < abs(pole) < 1.0):
        raise ValueError("pole must lie strictly inside the unit circle")
    g = np.empty(length, dtype=complex)
    g[0] = -np.conj(pole)
    if length > 1:
        i = np.arange(1, length)
        g[1:] = pole ** i * (1.0 / pole - np.conj(pole))
    return g


def apf_cascade_taps(poles: np.ndarray, length: int) -> np.ndarray:
    """First length taps of the cascade of first-order all-pass sections.

    Convolving factors that are each truncated to length samples is exact for
    the first length outputs because every section is causal.
    """
    poles = np.asarray(poles)
    if poles.size < 1:
        raise ValueError("need at least one pole")
    taps = apf_first_order_taps(poles[0], length)
    for p in poles[1:]:
        taps = linear_convolve(taps, apf_first_order_taps(p, length))[:length]
    return taps


def apf_frequency_response(poles: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Exact (untruncated) cascade response, evaluated from the rational form.

    Independent of the tap-domain path on purpose: used to check that the
    untruncated cascade is all-pass, |G(e^{j w})| = 1.
    """
    poles = np.asarray(poles)
    zinv = np.exp(-1j * np.asarray(omega, dtype=float))
    resp = np.ones_like(zinv, dtype=complex)
    for p in poles:
        resp = resp * (np.conj(p) - zinv) / (1.0 - p * zinv)
    return resp


def generate_apf_vchan(
    cfg: ApfConfig, n_dims: int, n_bins: int, rng: np.random.Generator
) -> VirtualChannelMatrix:
    """Virtual channel matrix with one fresh all-pass cascade per dimension.

    Row n of freq is the n_bins-point DFT of that row's zero-padded taps.
    No renormalization is applied after truncation.
    """
    cfg.validate()
    if n_dims < 1:
        raise ValueError("need at least one space-time dimension")
    if cfg.num_taps > n_bins:
        raise ValueError("truncation length cannot exceed the bin count")
    taps = np.empty((n_dims, cfg.num_taps), dtype=complex)
    for n in range(n_dims):
        poles = sample_poles(cfg.order, cfg.pole_modulus, rng)
        taps[n] = apf_cascade_taps(poles, cfg.num_taps)
    padded = np.zeros((n_dims, n_bins), dtype=complex)
    padded[:, : cfg.num_taps] = taps
    return VirtualChannelMatrix(freq=fft(padded), taps=taps, scheme="apf")


def generate_dither_vchan(
    n_dims: int, n_bins: int, group_size: int, rng: np.random.Generator
) -> VirtualChannelMatrix:
    """Block phase dithering: unit-modulus entries, one phase per (row, group).

    Phases are i.i.d. uniform on [0, 2*pi) and constant across each group of
    group_size consecutive bins.
    """
    if n_dims < 1:
        raise ValueError("need at least one space-time dimension")
    if group_size < 1 or n_bins % group_size != 0:
        raise ValueError("bin count must be a multiple of the group size")
    n_groups = n_bins // group_size
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(n_dims, n_groups))
    freq = np.exp(1j * np.repeat(phases, group_size, axis=1))
    return VirtualChannelMatrix(freq=freq, taps=None, scheme="phase-dither")
