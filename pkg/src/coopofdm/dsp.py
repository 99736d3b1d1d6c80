"""Shared signal-processing primitives: FFT conventions, convolution, noise, RNG streams.

The whole package uses one FFT convention: the forward transform is
unnormalized, X(k) = sum_i x(i) exp(-2j*pi*i*k/K), and the inverse carries
the 1/K factor. This matches numpy's default and every caller relies on it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _require_pow2(n: int) -> None:
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"transform length must be a power of two, got {n}")


def fft(x: np.ndarray) -> np.ndarray:
    """Unnormalized forward DFT along the last axis (power-of-two length)."""
    x = np.asarray(x)
    _require_pow2(x.shape[-1])
    return np.fft.fft(x, axis=-1)


def ifft(x: np.ndarray) -> np.ndarray:
    """Inverse DFT along the last axis, carrying the 1/K normalization."""
    x = np.asarray(x)
    _require_pow2(x.shape[-1])
    return np.fft.ifft(x, axis=-1)


def linear_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full linear convolution, output length len(a) + len(b) - 1."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("linear_convolve expects 1-d sequences")
    if a.size == 0 or b.size == 0:
        raise ValueError("linear_convolve expects non-empty sequences")
    return np.convolve(a, b)


def gaussian_noise(n: int, variance: float, rng: np.random.Generator) -> np.ndarray:
    """Circularly symmetric complex Gaussian samples, total variance per sample."""
    if n < 0:
        raise ValueError("sample count must be non-negative")
    if variance < 0:
        raise ValueError("noise variance must be non-negative")
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


@dataclass(frozen=True)
class RngStream:
    """Deterministic, splittable random stream keyed by (seed, stream key).

    Identical (seed, key) pairs reproduce the same sequence bit for bit;
    distinct keys give statistically independent streams.  Built on the
    counter-based Philox generator, so parallel Monte-Carlo trials can each
    derive their own stream without any coordination.
    """

    seed: int
    key: tuple[int, ...] = ()

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        return np.random.Generator(np.random.Philox(ss))

    def child(self, *key: int) -> "RngStream":
        return RngStream(self.seed, self.key + tuple(int(k) for k in key))
