import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from meshwav.harmonic import IdentityMismatch, read_coefficients_csv
from meshwav.slepian import SlepianCoeffs, slepian_field
from meshwav.transform import (
    WaveletCoefficients,
    analysis,
    coefficient_field,
    parseval_check,
    synthesis,
    write_bundle,
)
from meshwav.wavelets import WaveletKernels, build_kernels


def test_single_mode_analysis():
    k = build_kernels(3.0, 2, 72)
    p0 = 20
    w = analysis(k, np.eye(72)[p0])
    assert_array_equal(w.scaling, k.scaling[p0] * np.eye(72)[p0])
    for j in k.scales:
        assert_array_equal(w.wavelet(j), k.wavelet(j)[p0] * np.eye(72)[p0])


def test_zero_signal():
    k = build_kernels(2.0, 1, 40)
    w = analysis(k, np.zeros(40))
    assert_array_equal(w.scaling, 0.0)
    assert_array_equal(w.wavelets, 0.0)
    assert_array_equal(synthesis(k, w).values, 0.0)
    assert parseval_check(k, np.zeros(40)) == (0.0, 0.0)


def test_analysis_brute_force(rng):
    k = build_kernels(2.0, 0, 32)
    f = rng.standard_normal(32)
    w = analysis(k, f)
    for p in range(32):
        assert w.scaling[p] == k.scaling[p] * f[p]
        for j in k.scales:
            assert w.wavelet(j)[p] == k.wavelet(j)[p] * f[p]


@settings(max_examples=40, deadline=None)
@given(
    lam=st.floats(1.2, 5.0),
    j0=st.integers(0, 3),
    N=st.integers(2, 400),
    seed=st.integers(0, 2**32 - 1),
)
def test_exact_reconstruction(lam, j0, N, seed):
    from meshwav.wavelets import highest_scale

    if j0 >= highest_scale(N, lam):
        return
    k = build_kernels(lam, j0, N)
    f = np.random.default_rng(seed).standard_normal(N)
    back = synthesis(k, analysis(k, f)).values
    assert np.linalg.norm(back - f) <= 1e-10 * np.linalg.norm(f)
    e_in, e_out = parseval_check(k, f)
    assert abs(e_out / e_in - 1) <= 1e-10


def test_unit_vector_energy():
    k = build_kernels(3.0, 2, 329)
    for p in (0, 8, 9, 100, 328):
        e_in, e_out = parseval_check(k, np.eye(329)[p])
        assert e_in == 1.0
        assert_allclose(e_out, 1.0, atol=1e-12)


def test_perturbed_kernels_error_is_predicted(rng):
    k = build_kernels(2.0, 1, 50)
    bumped = k.wavelets.copy()
    bumped[1] *= 1.01
    bad = WaveletKernels(k.lam, k.j0, k.J, k.N, k.scaling, bumped)
    f = rng.standard_normal(50)
    got = synthesis(bad, analysis(bad, f)).values - f
    admissible_sum = bad.scaling**2 + np.sum(bad.wavelets**2, axis=0)
    assert_allclose(got, (admissible_sum - 1) * f, atol=1e-14)
    assert np.abs(got).max() > 1e-4


def test_mismatched_tiling():
    a = build_kernels(3.0, 2, 72)
    b = build_kernels(3.0, 1, 72)
    with pytest.raises(IdentityMismatch, match="coefficients from different tiling"):
        synthesis(b, analysis(a, np.ones(72)))
    with pytest.raises(ValueError):
        analysis(a, np.ones(71))


def test_coefficient_maps(ico3_basis, ico3_slepian):
    N = ico3_slepian.shannon
    k = build_kernels(3.0, 2, N)
    w = analysis(k, SlepianCoeffs(np.eye(N)[0], ico3_slepian.digest))
    s1 = slepian_field(ico3_basis, ico3_slepian, 1)
    assert_allclose(coefficient_field(ico3_basis, ico3_slepian, w, "scaling"), k.scaling[0] * s1, atol=1e-14)
    zero = analysis(k, np.zeros(N))
    for j in k.scales:
        assert_array_equal(coefficient_field(ico3_basis, ico3_slepian, zero, j), 0.0)
    with pytest.raises(IndexError):
        coefficient_field(ico3_basis, ico3_slepian, w, k.J + 1)
    with pytest.raises(IndexError):
        coefficient_field(ico3_basis, ico3_slepian, w, 1)


def test_maps_exist_for_homer_scales_only():
    k = build_kernels(3.0, 2, 329)
    w = analysis(k, np.ones(329))
    for j in range(2, 7):
        w.select(j)
        w.select(("wavelet", j))
    for j in (1, 7):
        with pytest.raises(IndexError):
            w.select(j)


def test_bundle(tmp_path, rng):
    k = build_kernels(3.0, 2, 72)
    f = SlepianCoeffs(rng.standard_normal(72), b"\x01" * 32)
    w = analysis(k, f)
    paths = write_bundle(k, w, tmp_path / "bundle", {"basis_sha256": "ab"})
    manifest = json.loads((tmp_path / "bundle" / "manifest.json").read_text())
    assert manifest["lambda"] == 3.0 and manifest["j0"] == 2 and manifest["J"] == 4 and manifest["N"] == 72
    assert manifest["kernel_sha256"] == k.digest.hex()
    assert manifest["slepian_sha256"] == (b"\x01" * 32).hex()
    assert manifest["basis_sha256"] == "ab"
    assert set(manifest["files"]) == {"scaling", "wavelet_2", "wavelet_3", "wavelet_4"}
    assert len(paths) == 5
    back = read_coefficients_csv(tmp_path / "bundle" / manifest["files"]["wavelet_3"])
    assert_array_equal(back, w.wavelet(3))
