"""Slepian functions of a region.

Given a region R, the Slepian functions are the band-limited combinations
of mesh modes that put as much of their energy inside R as possible. The
concentration eigenvalues mu_p measure that fraction. Roughly the first N
of them are close to one, where N is the Shannon number.
"""

# %%
import numpy as np

from _common import output_dir
from meshwav.laplacian import mesh_basis
from meshwav.mesh_io import write_field
from meshwav.meshes import half_sphere_region, icosphere
from meshwav.slepian import slepian_basis, slepian_field

out = output_dir("slepian")

mesh = icosphere(4)
region = half_sphere_region(mesh)
basis = mesh_basis(mesh, 400)
sb = slepian_basis(basis, region)
mu = sb.eigenvalues

# %%
print(f"region: {len(region)} of {mesh.n_vertices} vertices, area fraction {sb.region_area / sb.total_area:.4f}")
print(f"Shannon number N = {sb.shannon} (exact {sb.shannon_exact:.2f})")
print(f"sum of mu = {mu.sum():.2f}, count(mu > 0.5) = {np.sum(mu > 0.5)}")
for p in (1, sb.shannon // 2, sb.shannon - 10, sb.shannon, sb.shannon + 10, 400):
    print(f"  mu_{p:<3d} = {mu[p - 1]:.6f}")

# %% [markdown]
# The eigenvalue curve is a plateau at 1, a sharp drop around N, and a
# plateau at 0: well concentrated, transitional, and excluded functions.

# %%
np.savetxt(out / "concentration.csv", np.column_stack([np.arange(1, 401), mu]),
           delimiter=",", header="p,mu", comments="", fmt=["%d", "%.17g"])
for p in (1, 2, sb.shannon, 300):
    write_field(mesh, slepian_field(basis, sb, p), "vtk", out / f"slepian_{p}.vtk", name=f"S_{p}")
write_field(mesh, region.as_bool().astype(float), "vtk", out / "region.vtk", name="region")
sb.save(out / "half_sphere.mws")
print(f"wrote {out}")
