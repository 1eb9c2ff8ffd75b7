"""Spectral bases, Slepian concentration and scale-discretised wavelets on triangle meshes."""

from .convolution import dirac_delta, sift_convolve, translate
from .denoise import (
    NoiseModel,
    ThresholdPolicy,
    add_white_noise,
    denoise,
    hard_threshold,
    noise_sigma_fields,
    snr_db,
)
from .harmonic import HarmonicCoeffs, IdentityMismatch, forward, inverse
from .laplacian import (
    Basis,
    EigenSolverError,
    assemble_laplacian,
    cotangent_weights,
    edge_length_weights,
    eigenbasis,
    mesh_basis,
    vertex_weights,
)
from .mesh_io import Mesh, MeshError, RegionMask, load_region, read_mesh, region_from_indices, write_field
from .slepian import (
    ConcentrationWarning,
    IllConditioned,
    SlepianBasis,
    SlepianCoeffs,
    build_concentration_matrix,
    harmonic_to_slepian,
    slepian_analysis,
    slepian_basis,
    slepian_functions,
    slepian_synthesis,
    slepian_to_harmonic,
)
from .transform import WaveletCoefficients, analysis, coefficient_field, synthesis
from .wavelets import WaveletKernels, build_kernels, check_admissibility, eta_lambda, k_lambda, kappa_lambda

__version__ = "0.1.0"

__all__ = [
    "Mesh", "MeshError", "RegionMask", "read_mesh", "load_region", "region_from_indices", "write_field",
    "Basis", "EigenSolverError", "cotangent_weights", "edge_length_weights", "vertex_weights",
    "assemble_laplacian", "eigenbasis", "mesh_basis",
    "HarmonicCoeffs", "IdentityMismatch", "forward", "inverse",
    "SlepianBasis", "SlepianCoeffs", "IllConditioned", "ConcentrationWarning",
    "build_concentration_matrix", "slepian_basis", "slepian_functions", "slepian_analysis",
    "slepian_synthesis", "slepian_to_harmonic", "harmonic_to_slepian",
    "translate", "dirac_delta", "sift_convolve",
    "WaveletKernels", "build_kernels", "check_admissibility", "k_lambda", "kappa_lambda", "eta_lambda",
    "WaveletCoefficients", "analysis", "synthesis", "coefficient_field",
    "NoiseModel", "ThresholdPolicy", "add_white_noise", "noise_sigma_fields", "hard_threshold", "denoise", "snr_db",
]
