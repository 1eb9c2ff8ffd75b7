"""Wavelet coefficients of a field on a region.

The test field is the z-component of the vertex normals. Its Slepian
coefficients are split into a scaling part and one part per wavelet scale,
and each part is rendered back onto the mesh. Because the Slepian line is
ordered by concentration, larger j picks out functions that leak more out of
the region rather than finer spatial detail.
"""

# %%
import numpy as np

from _common import output_dir
from meshwav.laplacian import mesh_basis
from meshwav.mesh_io import vertex_normal_z_field, write_field
from meshwav.meshes import half_sphere_region, icosphere
from meshwav.slepian import slepian_analysis, slepian_basis, slepian_synthesis
from meshwav.transform import analysis, coefficient_field, parseval_check, synthesis, write_bundle
from meshwav.wavelets import build_kernels

out = output_dir("transform")

mesh = icosphere(4)
region = half_sphere_region(mesh)
basis = mesh_basis(mesh, 400)
sb = slepian_basis(basis, region)
N = sb.shannon

# bumpy version of the sphere so the normals carry some structure
field = vertex_normal_z_field(mesh) + 0.2 * np.sin(6 * mesh.vertices[:, 0]) * np.cos(4 * mesh.vertices[:, 1])
f = slepian_analysis(basis, sb, field, "global", N)
kernels = build_kernels(3.0, 2, N)
w = analysis(kernels, f)

# %%
e_in, e_out = parseval_check(kernels, f)
back = synthesis(kernels, w)
print(f"N={N}, scales {list(kernels.scales)}")
print(f"energy in {e_in:.6f}, energy in coefficients {e_out:.6f}")
print(f"reconstruction error {np.linalg.norm(back.values - f.values) / np.linalg.norm(f.values):.1e}")
print(f"scaling share of energy {np.sum(w.scaling ** 2) / e_in:.3f}")
for j in kernels.scales:
    print(f"  j={j} share {np.sum(w.wavelet(j) ** 2) / e_in:.3f}")

# %%
write_field(mesh, field, "vtk", out / "field.vtk", name="field")
write_field(mesh, slepian_synthesis(basis, sb, f), "vtk", out / "field_bandlimited.vtk", name="field")
for label in ["scaling", *kernels.scales]:
    name = "scaling" if label == "scaling" else f"wavelet_{label}"
    write_field(mesh, coefficient_field(basis, sb, w, label), "vtk", out / f"{name}.vtk", name=name)
write_bundle(kernels, w, out / "bundle")
print(f"wrote {out}")
