import numpy as np
import pytest

from meshwav.laplacian import mesh_basis
from meshwav.meshes import half_sphere_region, icosphere, random_patch, tetrahedron
from meshwav.mesh_io import region_from_indices
from meshwav.slepian import slepian_basis


@pytest.fixture(scope="session")
def tet():
    return tetrahedron()


@pytest.fixture(scope="session")
def patch():
    """Ten-vertex random triangulated height-field patch (has a boundary)."""
    return random_patch(10, seed=0)


@pytest.fixture(scope="session")
def patch_basis(patch):
    return mesh_basis(patch, patch.n_vertices)


@pytest.fixture(scope="session")
def patch_region(patch):
    return region_from_indices(patch, [1, 3, 4, 8])


@pytest.fixture(scope="session")
def patch_slepian(patch_basis, patch_region):
    return slepian_basis(patch_basis, patch_region)


@pytest.fixture(scope="session")
def ico3():
    return icosphere(3)


@pytest.fixture(scope="session")
def ico3_basis(ico3):
    return mesh_basis(ico3, 200)


@pytest.fixture(scope="session")
def ico3_region(ico3):
    return half_sphere_region(ico3)


@pytest.fixture(scope="session")
def ico3_slepian(ico3_basis, ico3_region):
    return slepian_basis(ico3_basis, ico3_region)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.pytest_terminal_summary_lines():
        terminalreporter.write_line(line)
