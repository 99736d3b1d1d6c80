"""Bit-interleaved coded modulation: rate-1/2 (7,5) code, interleaver, Gray QPSK.

The convolutional code has constraint length 3 and is zero-terminated with two
tail bits, so a block of B info bits encodes to 2*(B + 2) coded bits.  Per
input bit u with shift register (s1, s2) = (previous bit, bit before that) the
two outputs on the wire are out1 = u ^ s1 ^ s2 (generator 7) followed by
out2 = u ^ s2 (generator 5).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsp import RngStream

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

TAIL_BITS = 2

# Trellis tables indexed [state, input]; state = (s1 << 1) | s2 and the
# output pair is packed as (out1 << 1) | out2.
_NEXT_STATE = np.array([[0, 2], [0, 2], [1, 3], [1, 3]], dtype=np.uint8)
_OUT_SYMBOL = np.array([[0, 3], [3, 0], [2, 1], [1, 2]], dtype=np.uint8)


@dataclass(frozen=True)
class CodecConfig:
    """Block sizing and interleaver seeding for one coded frame."""

    interleaver_seed: int
    block_info_bits: int

    @property
    def coded_bits(self) -> int:
        return 2 * (self.block_info_bits + TAIL_BITS)

    def validate(self) -> None:
        if self.block_info_bits < 1:
            raise ValueError("block must carry at least one info bit")


def conv_encode(bits: np.ndarray) -> np.ndarray:
    """Encode with the zero-terminated (7,5) code; output 2*(len+2) bits."""
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size == 0:
        raise ValueError("expected a non-empty 1-d bit array")
    if not np.all((bits == 0) | (bits == 1)):
        raise ValueError("input must be binary")
    x = np.concatenate([bits.astype(np.uint8), np.zeros(TAIL_BITS, dtype=np.uint8)])
    xp = np.concatenate([np.zeros(2, dtype=np.uint8), x])
    out1 = xp[2:] ^ xp[1:-1] ^ xp[:-2]
    out2 = xp[2:] ^ xp[:-2]
    coded = np.empty(2 * x.size, dtype=np.uint8)
    coded[0::2] = out1
    coded[1::2] = out2
    return coded


def make_interleaver(n: int, seed: int) -> np.ndarray:
    """Pseudo-random bit permutation for one coded block, fixed by seed."""
    if n < 1:
        raise ValueError("interleaver length must be positive")
    perm = RngStream(seed).generator().permutation(n)
    return perm.astype(np.int64)


def interleave(x: np.ndarray, perm: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    if x.shape[0] != perm.shape[0]:
        raise ValueError("sequence length does not match the interleaver")
    return x[perm]


def deinterleave(y: np.ndarray, perm: np.ndarray) -> np.ndarray:
    y = np.asarray(y)
    if y.shape[0] != perm.shape[0]:
        raise ValueError("sequence length does not match the interleaver")
    out = np.empty_like(y)
    out[perm] = y
    return out


def qpsk_map(bits: np.ndarray) -> np.ndarray:
    """Gray map bit pairs (b0, b1) to ((1-2*b0) + 1j*(1-2*b1))/sqrt(2)."""
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size % 2 != 0:
        raise ValueError("expected an even-length 1-d bit array")
    if not np.all((bits == 0) | (bits == 1)):
        raise ValueError("input must be binary")
    b = bits.reshape(-1, 2)
    return ((1.0 - 2.0 * b[:, 0]) + 1j * (1.0 - 2.0 * b[:, 1])) / np.sqrt(2.0)


def qpsk_demap_llr(symbols: np.ndarray, gain: np.ndarray, n0: float) -> np.ndarray:
    """Per-bit LLRs for combined observations s_hat = gain*s + noise.

    The combiner output has noise variance gain*N0, which makes the max-log
    LLRs 2*sqrt(2)*Re(s_hat)/N0 and 2*sqrt(2)*Im(s_hat)/N0; positive LLR
    means bit 0.  Returns shape symbols.shape + (2,).
    """
    symbols = np.asarray(symbols)
    gain = np.asarray(gain, dtype=float)
    if n0 <= 0:
        raise ValueError("noise variance must be positive")
    if np.any(gain <= 0):
        raise ValueError("effective gain must be positive")
    factor = 2.0 * np.sqrt(2.0) / n0
    return np.stack([factor * symbols.real, factor * symbols.imag], axis=-1)


def _viterbi_path(bm: np.ndarray) -> np.ndarray:
    """Max-metric path through the 4-state trellis, terminated in state 0.

    bm[t, sym] is the branch metric for emitting packed output sym at step t.
    Ties keep the predecessor with the lower state index.  Returns the input
    bits along the winning path, tail included.
    """
    steps = bm.shape[0]
    pm = np.full(4, -np.inf)
    pm[0] = 0.0
    back = np.zeros((steps, 4), dtype=np.uint8)
    for t in range(steps):
        new_pm = np.full(4, -np.inf)
        for s in range(4):
            m = pm[s]
            for u in range(2):
                ns = _NEXT_STATE[s, u]
                cand = m + bm[t, _OUT_SYMBOL[s, u]]
                if cand > new_pm[ns]:
                    new_pm[ns] = cand
                    back[t, ns] = s
        pm = new_pm
    bits = np.zeros(steps, dtype=np.uint8)
    state = 0
    for t in range(steps - 1, -1, -1):
        bits[t] = state >> 1
        state = back[t, state]
    return bits


_viterbi_path_py = _viterbi_path
if _HAVE_NUMBA:
    _viterbi_path = njit(cache=True)(_viterbi_path)


def viterbi_decode(llrs: np.ndarray, n_info: int) -> np.ndarray:
    """Soft-input Viterbi decode; strips the two tail bits from the result."""
    llrs = np.asarray(llrs, dtype=float)
    if n_info < 1:
        raise ValueError("block must carry at least one info bit")
    steps = n_info + TAIL_BITS
    if llrs.ndim != 1 or llrs.size != 2 * steps:
        raise ValueError(f"expected {2 * steps} LLRs, got {llrs.size}")
    l1 = llrs[0::2]
    l2 = llrs[1::2]
    bm = np.empty((steps, 4))
    bm[:, 0] = 0.5 * (l1 + l2)
    bm[:, 1] = 0.5 * (l1 - l2)
    bm[:, 2] = 0.5 * (-l1 + l2)
    bm[:, 3] = 0.5 * (-l1 - l2)
    return _viterbi_path(bm)[:n_info]
