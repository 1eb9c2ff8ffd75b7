import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from meshwav.denoise import (
    NoiseModel,
    ThresholdPolicy,
    add_white_noise,
    denoise,
    hard_threshold,
    noise_sigma_fields,
    scale_labels,
    snr_db,
)
from meshwav.harmonic import IdentityMismatch
from meshwav.pipeline import prepare, run_denoising
from meshwav.slepian import SlepianCoeffs, slepian_functions
from meshwav.transform import analysis, coefficient_field
from meshwav.wavelets import WaveletKernels, build_kernels


@pytest.fixture(scope="module")
def setup(ico3, ico3_region, ico3_basis, ico3_slepian):
    return prepare(ico3, ico3_region, 200, 3.0, 2, basis=ico3_basis, sbasis=ico3_slepian)


# -- noise -------------------------------------------------------------------


def test_tiny_sigma_leaves_signal(rng):
    s = SlepianCoeffs(rng.standard_normal(50))
    z = add_white_noise(s, NoiseModel(sigma=1e-300, seed=3))
    assert_array_equal(z.values, s.values)


def test_seed_determinism(rng):
    s = SlepianCoeffs(rng.standard_normal(329))
    a = add_white_noise(s, NoiseModel(sigma=0.5, seed=2**63 + 11))
    b = add_white_noise(s, NoiseModel(sigma=0.5, seed=2**63 + 11))
    c = add_white_noise(s, NoiseModel(sigma=0.5, seed=12))
    assert a.values.tobytes() == b.values.tobytes()
    assert not np.array_equal(a.values, c.values)


def test_noise_stream_is_philox():
    # the generator is documented, so the first draws are part of the contract
    z = add_white_noise(np.zeros(3), NoiseModel(sigma=1.0, seed=42)).values
    ref = np.random.Generator(np.random.Philox(42)).standard_normal(3)
    assert_array_equal(z, ref)


def test_target_snr_calibration(rng):
    s = rng.standard_normal(329)
    model = NoiseModel(seed=0, target_snr_db=-5.0)
    assert_allclose(model.sigma_for(s) ** 2, 10 ** 0.5 * np.sum(s**2) / 329, rtol=1e-14)


def test_measured_input_snr_monte_carlo(rng):
    s = SlepianCoeffs(rng.standard_normal(329))
    measured = []
    for seed in range(25):
        z = add_white_noise(s, NoiseModel(seed=seed, target_snr_db=-5.0))
        measured.append(snr_db(s, z))
    measured = np.array(measured)
    assert np.all(np.abs(measured + 5.0) <= 1.5)
    assert abs(measured.mean() + 5.0) < 0.3


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel()
    with pytest.raises(ValueError):
        NoiseModel(sigma=0.0)
    with pytest.raises(ValueError):
        NoiseModel(sigma=1.0, seed=-1)
    with pytest.raises(ValueError, match="zero signal"):
        add_white_noise(np.zeros(4), NoiseModel(target_snr_db=0.0))
    with pytest.raises(ValueError):
        ThresholdPolicy(-1.0)
    ThresholdPolicy(0.0)


# -- noise levels ----------------------------------------------------------------


def test_sigma_fields_scale_linearly(setup):
    a = noise_sigma_fields(setup.kernels, setup.basis, setup.sbasis, 0.3)
    b = noise_sigma_fields(setup.kernels, setup.basis, setup.sbasis, 0.6)
    assert list(a) == scale_labels(setup.kernels)
    for key in a:
        assert_array_equal(b[key], 2 * a[key])


def test_sigma_field_single_mode_kernel(setup):
    k = setup.kernels
    q = 7
    spike = np.eye(k.N)[q - 1]
    single = WaveletKernels(k.lam, k.j0, k.J, k.N, spike, np.zeros_like(k.wavelets))
    sig = noise_sigma_fields(single, setup.basis, setup.sbasis, 0.4)["scaling"]
    S = slepian_functions(setup.basis, setup.sbasis, k.N)
    assert_allclose(sig, 0.4 * np.abs(S[:, q - 1]), rtol=1e-14)


def test_sigma_fields_monte_carlo(patch_basis, patch_slepian):
    N = patch_slepian.shannon
    k = build_kernels(1.5, 0, N)
    sigma = 0.7
    levels = noise_sigma_fields(k, patch_basis, patch_slepian, sigma)
    gen = np.random.Generator(np.random.Philox(5))
    draws = sigma * gen.standard_normal((10_000, N))
    S = slepian_functions(patch_basis, patch_slepian, N)
    for label in scale_labels(k):
        kernel = k.scaling if label == "scaling" else k.wavelet(label)
        # spatial coefficient maps of each pure-noise draw, built by brute force
        maps = np.array([S @ (kernel * n) for n in draws])
        sample = maps.std(axis=0, ddof=1)
        big = levels[label] > 1e-3 * levels[label].max()
        if big.any():
            assert_allclose(sample[big], levels[label][big], rtol=0.03)


# -- thresholding -------------------------------------------------------------------


def test_keep_everything_policy(setup, rng):
    z = add_white_noise(setup.signal, NoiseModel(seed=1, target_snr_db=0.0))
    d, report = denoise(z, setup.kernels, setup.basis, setup.sbasis, 0.5, ThresholdPolicy(0.0), setup.slepians)
    assert_allclose(d.values, z.values, atol=1e-8)
    assert all(v == 1.0 for v in report["kept_fraction"].values())


def test_huge_threshold_zeroes_everything(setup):
    z = add_white_noise(setup.signal, NoiseModel(seed=1, target_snr_db=0.0))
    d, report = denoise(z, setup.kernels, setup.basis, setup.sbasis, 0.5, ThresholdPolicy(1e9))
    assert_allclose(d.values, 0.0, atol=1e-12)
    assert all(v == 0.0 for v in report["kept_fraction"].values())


def test_kept_fraction_monotone_in_n_sigma(setup):
    z = add_white_noise(setup.signal, NoiseModel(seed=9, target_snr_db=-5.0))
    sigma = NoiseModel(seed=9, target_snr_db=-5.0).sigma_for(setup.signal)
    previous = None
    for n_sigma in (0.0, 0.5, 1.0, 2.0, 3.0, 5.0):
        _, report = denoise(z, setup.kernels, setup.basis, setup.sbasis, sigma, ThresholdPolicy(n_sigma), setup.slepians)
        kept = report["kept_fraction"]
        if previous is not None:
            assert all(kept[key] <= previous[key] for key in kept)
        previous = kept


def test_threshold_is_two_sided_and_idempotent(rng):
    maps = rng.standard_normal((200, 4))
    levels = np.abs(rng.standard_normal((200, 4)))
    kept, keep = hard_threshold(maps, levels, 1.0)
    assert_array_equal(keep, np.abs(maps) >= levels)
    # negative values above the threshold in magnitude survive
    assert np.any(kept < 0)
    again, keep2 = hard_threshold(kept, levels, 1.0)
    assert_array_equal(again, kept)
    assert_array_equal(keep2 | (kept == 0), keep | (kept == 0))


def test_denoise_matches_manual_pipeline(setup):
    # independent route: spatial maps from coefficient_field, explicit loops
    model = NoiseModel(seed=4, target_snr_db=-5.0)
    sigma = model.sigma_for(setup.signal)
    z = add_white_noise(setup.signal, model)
    d, _ = denoise(z, setup.kernels, setup.basis, setup.sbasis, sigma, ThresholdPolicy(2.0))
    k, basis, sb = setup.kernels, setup.basis, setup.sbasis
    w = analysis(k, z)
    levels = noise_sigma_fields(k, basis, sb, sigma)
    S = slepian_functions(basis, sb, k.N)
    out = np.zeros(k.N)
    for label in scale_labels(k):
        m = coefficient_field(basis, sb, w, label)
        m = np.where(np.abs(m) < 2.0 * levels[label], 0.0, m)
        coeffs = S.T @ (basis.weights * m)
        kernel = k.scaling if label == "scaling" else k.wavelet(label)
        out += kernel * coeffs
    assert_allclose(d.values, out, atol=1e-12)


def test_denoise_errors(setup, ico3_basis):
    z = SlepianCoeffs(setup.signal.values, setup.sbasis.digest)
    with pytest.raises(ValueError):
        denoise(z, setup.kernels, setup.basis, setup.sbasis, 0.0, ThresholdPolicy(2.0))
    with pytest.raises(IdentityMismatch):
        denoise(SlepianCoeffs(z.values, b"x" * 32), setup.kernels, setup.basis, setup.sbasis, 1.0, ThresholdPolicy())
    with pytest.raises(ValueError):
        denoise(np.zeros(3), setup.kernels, setup.basis, setup.sbasis, 1.0, ThresholdPolicy())


# -- SNR -------------------------------------------------------------------------------


def test_snr_conventions(rng):
    r = rng.standard_normal(40)
    assert snr_db(r, r) == math.inf
    e = rng.standard_normal(40)
    e *= np.linalg.norm(r) / np.linalg.norm(e)
    assert_allclose(snr_db(r, r + e), 0.0, atol=1e-12)
    assert_allclose(snr_db(r, r + e / math.sqrt(10)), 10.0, atol=1e-12)
    with pytest.raises(ValueError):
        snr_db(np.zeros(3), np.ones(3))
    with pytest.raises(ValueError):
        snr_db(r, r[:-1])


def test_pipeline_report(setup):
    run = run_denoising(setup, 2.0, -5.0, 3)
    r = run.report
    for key in ("snr_in_db", "snr_out_db", "boost_db", "n_sigma", "seed", "kept_fraction"):
        assert key in r
    assert_allclose(r["boost_db"], r["snr_out_db"] - r["snr_in_db"])
    assert r["shannon_number"] == setup.sbasis.shannon
    again = run_denoising(setup, 2.0, -5.0, 3)
    assert again.denoised.values.tobytes() == run.denoised.values.tobytes()
