"""Truncated all-pass generators and the phase-dither baseline."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from coopofdm.dsp import RngStream, fft
from coopofdm.vchan import (
    ApfConfig,
    apf_cascade_taps,
    apf_first_order_taps,
    apf_frequency_response,
    generate_apf_vchan,
    generate_dither_vchan,
    sample_poles,
)


def test_pole_modulus_bounds_rejected():
    rng = RngStream(1, ()).generator()
    with pytest.raises(ValueError):
        sample_poles(4, 0.0, rng)
    with pytest.raises(ValueError):
        sample_poles(4, 1.0, rng)
    cfg = ApfConfig(order=4, pole_modulus=1.2, num_taps=12)
    with pytest.raises(ValueError):
        cfg.validate()


def test_sampled_poles_sit_on_their_circle():
    rng = RngStream(2, ()).generator()
    poles = sample_poles(50, 0.7, rng)
    assert poles.shape == (50,)
    assert_allclose(np.abs(poles), 0.7, atol=1e-12)


def test_pole_angles_uniform():
    rng = RngStream(3, ()).generator()
    theta = np.angle(sample_poles(10**4, 0.5, rng)) % (2 * np.pi)
    result = stats.kstest(theta, stats.uniform(loc=0.0, scale=2 * np.pi).cdf)
    assert result.pvalue > 0.01


def test_first_order_taps_hand_values():
    assert_allclose(apf_first_order_taps(0.5, 3), [-0.5, 0.75, 0.375], rtol=1e-15)
    # Purely imaginary pole, worked by hand from the recursion.
    assert_allclose(apf_first_order_taps(0.3j, 3), [0.3j, 0.91, 0.273j], rtol=1e-15)


def test_first_order_rejects_unstable_pole():
    with pytest.raises(ValueError):
        apf_first_order_taps(1.0, 4)


def test_first_order_dc_gain():
    # Geometric-series limit of the taps at z=1: (1 - p*) / (1 - p), modulus 1.
    p = 0.5
    taps = apf_first_order_taps(p, 4096)
    dc = np.sum(taps)
    assert_allclose(dc, (1 - np.conj(p)) / (1 - p), rtol=1e-12)
    assert_allclose(np.abs(dc), 1.0, rtol=1e-12)


def test_first_order_unit_energy():
    taps = apf_first_order_taps(0.5, 64)
    assert abs(np.sum(np.abs(taps) ** 2) - 1.0) < 1e-10


def test_cascade_single_stage_matches_first_order():
    p = 0.4 * np.exp(1.1j)
    assert_allclose(apf_cascade_taps(np.array([p]), 9), apf_first_order_taps(p, 9), rtol=1e-14)


def test_cascade_hand_values():
    taps = apf_cascade_taps(np.array([0.5, 0.5]), 2)
    assert_allclose(taps, [0.25, -0.75], rtol=1e-15)


def test_cascade_rejects_empty_pole_list():
    with pytest.raises(ValueError):
        apf_cascade_taps(np.array([]), 4)


def test_cascade_matches_full_convolution_oracle():
    # Truncated sequential convolution must agree with convolving the full
    # (long) factor responses and then truncating.
    rng = np.random.default_rng(8)
    for _ in range(20):
        order = int(rng.integers(1, 6))
        mp = rng.uniform(0.1, 0.9)
        poles = mp * np.exp(2j * np.pi * rng.uniform(size=order))
        t_c = int(rng.integers(1, 24))
        full = np.array([1.0 + 0j])
        for p in poles:
            full = np.convolve(full, apf_first_order_taps(p, t_c + 64))
        assert_allclose(apf_cascade_taps(poles, t_c), full[:t_c], rtol=1e-12, atol=1e-12)


def test_cascade_truncation_is_a_prefix():
    rng = RngStream(21, ()).generator()
    poles = sample_poles(4, 0.7, rng)
    long = apf_cascade_taps(poles, 48)
    short = apf_cascade_taps(poles, 12)
    assert_allclose(short, long[:12], rtol=1e-14)


def test_cascade_tail_bound():
    # |g(i)| <= C(M) * i^(M-1) * Mp^(i-M+1) for i >= M with C(M) = 12/(M-1)!.
    rng = np.random.default_rng(31)
    for order in (1, 2, 3, 4, 5):
        c = 12.0 / math.factorial(order - 1)
        for mp in (0.1, 0.3, 0.5, 0.7, 0.9):
            for _ in range(10):
                poles = mp * np.exp(2j * np.pi * rng.uniform(size=order))
                g = apf_cascade_taps(poles, 200)
                i = np.arange(order, 200)
                bound = c * i ** (order - 1) * mp ** (i - order + 1.0)
                assert np.all(np.abs(g[order:]) <= bound)


def test_long_truncation_nearly_flat():
    rng = np.random.default_rng(12)
    poles = 0.1 * np.exp(2j * np.pi * rng.uniform(size=4))
    taps = apf_cascade_taps(poles, 64)
    response = fft(np.pad(taps, (0, 128 - 64)))
    assert np.max(np.abs(np.abs(response) - 1.0)) < 1e-6


def test_rational_response_is_all_pass():
    # Flatness of the untruncated filter, evaluated from poles and zeros
    # directly; independent of any tap computation.
    rng = np.random.default_rng(40)
    omega = 2 * np.pi * np.arange(128) / 128
    for _ in range(10):
        order = int(rng.integers(1, 6))
        poles = rng.uniform(0.05, 0.95) * np.exp(2j * np.pi * rng.uniform(size=order))
        mag = np.abs(apf_frequency_response(poles, omega))
        assert np.max(np.abs(mag - 1.0)) < 1e-12


def test_truncated_response_converges_to_rational():
    rng = np.random.default_rng(41)
    poles = 0.5 * np.exp(2j * np.pi * rng.uniform(size=2))
    omega = 2 * np.pi * np.arange(128) / 128
    exact = apf_frequency_response(poles, omega)
    taps = apf_cascade_taps(poles, 120)
    approx = fft(np.pad(taps, (0, 8)))
    # At this length the geometric tail is far below double precision, so
    # the comparison checks the two formulations agree to roundoff.
    assert np.max(np.abs(approx - exact)) < 1e-12


def test_flatness_deviation_shrinks_with_truncation_length():
    rng = RngStream(77, ()).generator()
    poles = sample_poles(4, 0.7, rng)
    devs = []
    for t_c in (6, 12, 24, 48):
        taps = apf_cascade_taps(poles, t_c)
        response = fft(np.pad(taps, (0, 128 - t_c)))
        devs.append(np.max(np.abs(np.abs(response) - 1.0)))
    assert devs == sorted(devs, reverse=True)


def test_generated_matrix_shape_and_self_consistency():
    cfg = ApfConfig(order=4, pole_modulus=0.7, num_taps=12)
    vc = generate_apf_vchan(cfg, 2, 128, RngStream(5, ()).generator())
    assert vc.scheme == "apf"
    assert vc.freq.shape == (2, 128)
    assert vc.taps.shape == (2, 12)
    for n in range(2):
        assert_allclose(vc.freq[n], fft(np.pad(vc.taps[n], (0, 116))), rtol=1e-12, atol=1e-12)
    # Rows come from independently drawn filters.
    assert not np.allclose(vc.freq[0], vc.freq[1])


def test_generated_rows_nearly_flat_at_small_modulus():
    cfg = ApfConfig(order=4, pole_modulus=0.1, num_taps=12)
    vc = generate_apf_vchan(cfg, 2, 128, RngStream(6, ()).generator())
    assert np.max(np.abs(np.abs(vc.freq) - 1.0)) < 1e-6


def test_generation_is_deterministic():
    cfg = ApfConfig(order=3, pole_modulus=0.5, num_taps=10)
    a = generate_apf_vchan(cfg, 2, 64, RngStream(9, (4,)).generator())
    b = generate_apf_vchan(cfg, 2, 64, RngStream(9, (4,)).generator())
    assert np.array_equal(a.freq, b.freq)
    assert np.array_equal(a.taps, b.taps)


def test_taps_longer_than_bins_rejected():
    cfg = ApfConfig(order=2, pole_modulus=0.5, num_taps=130)
    with pytest.raises(ValueError):
        generate_apf_vchan(cfg, 2, 128, RngStream(1, ()).generator())


def test_dither_matrix_unit_modulus_and_group_constant():
    vc = generate_dither_vchan(2, 128, 2, RngStream(10, ()).generator())
    assert vc.scheme == "phase-dither"
    assert vc.taps is None
    assert_allclose(np.abs(vc.freq), 1.0, rtol=1e-15)
    assert_allclose(vc.freq[:, 0::2], vc.freq[:, 1::2], rtol=1e-15)


def test_dither_draws_one_phase_per_row_and_group():
    vc = generate_dither_vchan(2, 4, 2, RngStream(11, ()).generator())
    phases = vc.freq[:, 0::2].ravel()
    assert len(np.unique(phases)) == 4


def test_dither_requires_divisible_grouping():
    with pytest.raises(ValueError):
        generate_dither_vchan(2, 127, 2, RngStream(1, ()).generator())
