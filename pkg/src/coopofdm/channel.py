"""Rician block fading per relay and the superposed uplink with AWGN.

Taps follow an exponential power-delay profile normalized to unit total
power.  The line-of-sight component sits on tap 0 with power K/(K+1); the
remaining 1/(K+1) is diffuse and split across taps in proportion to the
profile.  Realizations are redrawn independently per block and per relay.

The line-of-sight phase convention is config-exposed because it changes
the multi-relay picture qualitatively.  Relays carry independent
oscillators and positions, so their strong specular components arrive
with unrelated phases; ``los_phase="random"`` models that and is the
default.  ``los_phase="zero"`` aligns every relay's specular component
at phase 0, which turns the uplink sum into a coherent combiner and
suppresses the deep relative-phase fades that randomized virtual
channels exist to mitigate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsp import gaussian_noise, linear_convolve

LOS_PHASE_MODES = ("random", "zero")


@dataclass(frozen=True)
class ChannelConfig:
    """Tap count, Rice factor in dB, power-delay decay and LoS phase mode."""

    num_taps: int = 3
    k_rice_db: float = 20.0
    pdp_decay: float = 1.0
    los_phase: str = "random"

    def validate(self) -> None:
        if self.num_taps < 1:
            raise ValueError("channel needs at least one tap")
        if self.pdp_decay <= 0:
            raise ValueError("power-delay decay constant must be positive")
        if not np.isfinite(self.k_rice_db):
            raise ValueError("Rice factor must be finite")
        if self.los_phase not in LOS_PHASE_MODES:
            raise ValueError(f"LoS phase mode must be one of {LOS_PHASE_MODES}")

    def pdp(self) -> np.ndarray:
        p = np.exp(-np.arange(self.num_taps) / self.pdp_decay)
        return p / p.sum()


def draw_rician(cfg: ChannelConfig, rng: np.random.Generator) -> np.ndarray:
    """One relay's tap vector for one block; average total power is 1."""
    cfg.validate()
    k_lin = 10.0 ** (cfg.k_rice_db / 10.0)
    pdp = cfg.pdp()
    diffuse_power = pdp / (k_lin + 1.0)
    h = gaussian_noise(cfg.num_taps, 1.0, rng) * np.sqrt(diffuse_power)
    los = np.sqrt(k_lin / (k_lin + 1.0))
    if cfg.los_phase == "random":
        los = los * np.exp(2j * np.pi * rng.uniform())
    h[0] += los
    return h


def apply_uplink(
    streams: np.ndarray,
    channels: np.ndarray,
    n0: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Superpose per-relay streams through their channels and add noise.

    streams is (U, n_samples) and channels (U, L).  Each stream is linearly
    convolved with its taps (so echoes span OFDM symbol boundaries), the
    convolution tail beyond the stream length is dropped, and circularly
    symmetric noise of per-sample variance n0 is added.
    """
    streams = np.asarray(streams)
    channels = np.asarray(channels)
    if streams.ndim != 2 or channels.ndim != 2:
        raise ValueError("expected stacked per-relay streams and tap vectors")
    if streams.shape[0] != channels.shape[0]:
        raise ValueError("stream count does not match channel count")
    if n0 < 0:
        raise ValueError("noise variance must be non-negative")
    n = streams.shape[1]
    y = np.zeros(n, dtype=complex)
    for x, h in zip(streams, channels):
        y += linear_convolve(x, h)[:n]
    if n0 > 0:
        y += gaussian_noise(n, n0, rng)
    return y
