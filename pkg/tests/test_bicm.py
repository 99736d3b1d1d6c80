"""Convolutional coding, interleaving, QPSK mapping and soft decoding."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from coopofdm import bicm
from coopofdm.bicm import (
    TAIL_BITS,
    CodecConfig,
    conv_encode,
    deinterleave,
    interleave,
    make_interleaver,
    qpsk_demap_llr,
    qpsk_map,
    viterbi_decode,
)
from coopofdm.dsp import RngStream, gaussian_noise

QPSK_POINTS = {
    (0, 0): (1 + 1j) / np.sqrt(2),
    (0, 1): (1 - 1j) / np.sqrt(2),
    (1, 0): (-1 + 1j) / np.sqrt(2),
    (1, 1): (-1 - 1j) / np.sqrt(2),
}


def perfect_llrs(coded: np.ndarray, scale: float = 50.0) -> np.ndarray:
    return scale * (1.0 - 2.0 * coded.astype(float))


def test_encoder_trellis_trace():
    out = conv_encode(np.array([1, 0, 0], dtype=np.uint8))
    assert out.shape == (10,)  # 2 * (3 info + 2 tail)
    assert np.array_equal(out[:6], [1, 1, 1, 0, 1, 1])


def test_encoder_zero_input_zero_output():
    out = conv_encode(np.zeros(40, dtype=np.uint8))
    assert not out.any()


def test_encoder_tail_drives_state_to_zero():
    # After the tail the encoder sits in state 0, so appending zeros to the
    # info word only appends zero coded bits.
    bits = np.array([1, 0, 1, 1, 0], dtype=np.uint8)
    longer = np.concatenate([bits, np.zeros(3, dtype=np.uint8)])
    assert np.array_equal(conv_encode(bits), conv_encode(longer)[: 2 * (len(bits) + 2)])


def test_encoder_linearity():
    rng = np.random.default_rng(14)
    for _ in range(100):
        a = rng.integers(0, 2, size=64).astype(np.uint8)
        b = rng.integers(0, 2, size=64).astype(np.uint8)
        assert np.array_equal(conv_encode(a ^ b), conv_encode(a) ^ conv_encode(b))


def test_interleaver_is_a_permutation():
    perm = make_interleaver(4608, seed=7)
    assert np.array_equal(np.sort(perm), np.arange(4608))


def test_interleaver_round_trip_and_determinism():
    rng = np.random.default_rng(2)
    x = rng.integers(0, 2, size=512).astype(np.uint8)
    perm = make_interleaver(512, seed=3)
    assert np.array_equal(deinterleave(interleave(x, perm), perm), x)
    assert np.array_equal(perm, make_interleaver(512, seed=3))
    assert not np.array_equal(perm, make_interleaver(512, seed=4))


def test_interleaver_length_mismatch_rejected():
    perm = make_interleaver(16, seed=1)
    with pytest.raises(ValueError):
        interleave(np.zeros(8, dtype=np.uint8), perm)
    with pytest.raises(ValueError):
        deinterleave(np.zeros(8, dtype=np.uint8), perm)


def test_qpsk_mapping_table():
    for (b0, b1), point in QPSK_POINTS.items():
        got = qpsk_map(np.array([b0, b1], dtype=np.uint8))
        assert_allclose(got, [point], rtol=1e-15)


def test_qpsk_unit_energy():
    symbols = qpsk_map(np.array([0, 0, 0, 1, 1, 0, 1, 1], dtype=np.uint8))
    assert_allclose(np.abs(symbols) ** 2, np.ones(4), rtol=1e-15)


def test_qpsk_gray_adjacency():
    # Constellation neighbours (distance sqrt(2)) differ in exactly one bit.
    labels = list(QPSK_POINTS)
    for i, a in enumerate(labels):
        for b in labels[i + 1 :]:
            dist = abs(QPSK_POINTS[a] - QPSK_POINTS[b])
            hamming = (a[0] ^ b[0]) + (a[1] ^ b[1])
            if abs(dist - np.sqrt(2)) < 1e-12:
                assert hamming == 1
            else:
                assert hamming == 2


def test_qpsk_odd_bit_count_rejected():
    with pytest.raises(ValueError):
        qpsk_map(np.array([1, 0, 1], dtype=np.uint8))


def test_demap_sign_consistency():
    s = 3.7 * (1 + 1j) / np.sqrt(2)
    llrs = qpsk_demap_llr(np.array([s]), np.array([3.7]), n0=0.25)
    assert llrs.shape == (1, 2)
    assert np.all(llrs > 0)


def test_demap_zero_symbol_is_erasure():
    llrs = qpsk_demap_llr(np.array([0.0 + 0.0j]), np.array([1.0]), n0=0.5)
    assert_allclose(llrs, np.zeros((1, 2)))


def test_demap_rejects_degenerate_inputs():
    s = np.array([1.0 + 0.0j])
    with pytest.raises(ValueError):
        qpsk_demap_llr(s, np.array([1.0]), n0=0.0)
    with pytest.raises(ValueError):
        qpsk_demap_llr(s, np.array([0.0]), n0=0.5)


def test_demap_matches_nearest_point_decisions():
    rng = RngStream(55, ()).generator()
    bits = rng.integers(0, 2, size=2 * 10**4).astype(np.uint8)
    tx = qpsk_map(bits)
    rx = tx + gaussian_noise(tx.size, 0.5, rng)
    llrs = qpsk_demap_llr(rx, np.ones(tx.size), n0=0.5).ravel()
    hard = (llrs < 0).astype(np.uint8)
    points = np.array([QPSK_POINTS[(b0, b1)] for b0 in (0, 1) for b1 in (0, 1)])
    nearest = np.argmin(np.abs(rx[:, None] - points[None, :]), axis=1)
    expected = np.stack([nearest >> 1, nearest & 1], axis=-1).ravel().astype(np.uint8)
    assert np.array_equal(hard, expected)


def test_viterbi_noiseless_round_trip():
    rng = np.random.default_rng(8)
    for _ in range(100):
        bits = rng.integers(0, 2, size=120).astype(np.uint8)
        coded = conv_encode(bits)
        assert np.array_equal(viterbi_decode(perfect_llrs(coded), 120), bits)


def test_viterbi_corrects_any_single_coded_bit_error():
    # Free distance of the (7,5) code is 5, so one flipped coded bit can
    # never move the received word closer to a different codeword.
    rng = np.random.default_rng(9)
    bits = rng.integers(0, 2, size=30).astype(np.uint8)
    coded = conv_encode(bits)
    for position in range(coded.size):
        llrs = perfect_llrs(coded)
        llrs[position] = -llrs[position]
        assert np.array_equal(viterbi_decode(llrs, 30), bits), f"flip at {position}"


def test_viterbi_all_zero_llrs_tie_break():
    out = viterbi_decode(np.zeros(2 * (50 + TAIL_BITS)), 50)
    assert out.shape == (50,)
    assert not out.any()


def test_viterbi_length_mismatch_rejected():
    with pytest.raises(ValueError):
        viterbi_decode(np.zeros(99), 50)


def test_viterbi_kernel_parity_with_python_path():
    # The accelerated path and the plain-python reference must agree
    # branch-for-branch, including on tie metrics.
    rng = np.random.default_rng(10)
    for _ in range(20):
        bm = rng.normal(size=(64, 4))
        assert np.array_equal(bicm._viterbi_path(bm), bicm._viterbi_path_py(bm))
    ties = np.zeros((32, 4))
    assert np.array_equal(bicm._viterbi_path(ties), bicm._viterbi_path_py(ties))


def test_codec_config_sizes():
    cfg = CodecConfig(interleaver_seed=7, block_info_bits=2302)
    assert cfg.coded_bits == 4608
    cfg.validate()
    with pytest.raises(ValueError):
        CodecConfig(interleaver_seed=7, block_info_bits=0).validate()


def test_bicm_chain_without_channel_is_identity():
    rng = np.random.default_rng(12)
    bits = rng.integers(0, 2, size=500).astype(np.uint8)
    perm = make_interleaver(2 * (500 + TAIL_BITS), seed=21)
    tx = qpsk_map(interleave(conv_encode(bits), perm))
    llrs = qpsk_demap_llr(tx, np.ones(tx.size), n0=0.01).ravel()
    decoded = viterbi_decode(deinterleave(llrs, perm), 500)
    assert np.array_equal(decoded, bits)


def test_coding_gain_over_awgn():
    """Soft-decision coded BER sits below the uncoded curve at 6 dB."""
    from math import erfc, sqrt

    esn0_db = 6.0
    n0 = 10.0 ** (-esn0_db / 10.0)
    uncoded_ber = 0.5 * erfc(sqrt(2.0 * 10.0 ** (esn0_db / 10.0)) / sqrt(2.0))
    rng = RngStream(1234, ()).generator()
    n_info = 2302
    perm = make_interleaver(2 * (n_info + TAIL_BITS), seed=7)
    bit_errors = 0
    total = 0
    for _ in range(40):
        bits = rng.integers(0, 2, size=n_info).astype(np.uint8)
        tx = qpsk_map(interleave(conv_encode(bits), perm))
        rx = tx + gaussian_noise(tx.size, n0, rng)
        llrs = qpsk_demap_llr(rx, np.ones(tx.size), n0=n0).ravel()
        decoded = viterbi_decode(deinterleave(llrs, perm), n_info)
        bit_errors += int(np.sum(decoded != bits))
        total += n_info
    coded_ber = bit_errors / total
    print(f"coded BER {coded_ber:.3e} vs uncoded {uncoded_ber:.3e}")
    assert coded_ber < uncoded_ber
