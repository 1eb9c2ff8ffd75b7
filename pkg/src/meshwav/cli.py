"""Command-line front end: basis, slepian, tile, transform and denoise stages.

Each stage writes files that the next one reads, and every hand-off is
checked against the content hashes stored in the artifacts. Exit codes are
0 on success, 1 on a runtime failure and 2 on a usage error; diagnostics go
to standard error.

``MESHWAV_THREADS`` (a positive integer) caps the BLAS/LAPACK thread pools.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import shutil
import sys
import tempfile
import warnings
from contextlib import contextmanager, nullcontext
from pathlib import Path

import numpy as np

from .harmonic import IdentityMismatch
from .laplacian import Basis, mesh_basis
from .mesh_io import MeshError, load_region, read_field_csv, read_mesh, vertex_normal_z_field, write_field
from .slepian import SlepianBasis, slepian_analysis, slepian_basis, slepian_synthesis
from .transform import analysis, coefficient_field, write_bundle
from .wavelets import build_kernels, highest_scale, write_kernels_csv

__all__ = ["main", "UsageError"]

THREADS_ENV = "MESHWAV_THREADS"


class UsageError(Exception):
    """Bad arguments or inputs that violate a precondition (exit code 2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# -- argument helpers --------------------------------------------------------


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def _finite(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return value


def _dilation(text: str) -> float:
    value = _finite(text)
    if value <= 1:
        raise argparse.ArgumentTypeError(f"lambda must exceed 1, got {value}")
    return value


def _seed(text: str) -> int:
    value = _nonneg_int(text)
    if value >= 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _existing(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} file not found: {path}")
    return p


def _check_num(num: int, n_vertices: int) -> None:
    if num > n_vertices:
        raise UsageError(f"i_max exceeds vertex count ({num} > {n_vertices})")


def _check_scales(lam: float, j0: int, N: int) -> int:
    J = highest_scale(N, lam)
    if j0 >= J:
        raise UsageError(
            f"--jmin {j0} leaves no wavelet scales: J={J} for bandlimit {N} and lambda {lam}; "
            f"choose --jmin below {J}"
        )
    return J


def _load_basis(path: Path) -> Basis:
    try:
        return Basis.load(path)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _load_slepian(path: Path) -> SlepianBasis:
    try:
        return SlepianBasis.load(path)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _check_basis_mesh(basis: Basis, mesh, path) -> None:
    if basis.n != mesh.n_vertices:
        raise UsageError(f"{path} has {basis.n} vertices, the mesh has {mesh.n_vertices}")


def _check_slepian_basis(sbasis: SlepianBasis, basis: Basis, path) -> None:
    if sbasis.basis_digest != basis.digest:
        raise UsageError(f"{path} was built from a different basis (hash mismatch)")


# -- atomic outputs ----------------------------------------------------------


@contextmanager
def _atomic_file(path):
    """Yield a temporary path that replaces ``path`` only on success."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    os.close(fd)
    try:
        yield Path(tmp)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


@contextmanager
def _atomic_dir(path):
    """Stage files in a scratch directory and move them into ``path`` on success.

    On failure nothing is left behind, including ``path`` itself when this
    call created it.
    """
    target = Path(path)
    created = not target.exists()
    if not created and not target.is_dir():
        raise UsageError(f"output path exists and is not a directory: {target}")
    target.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=f".{target.name}.", dir=target.parent))
    try:
        yield stage
        target.mkdir(exist_ok=True)
        for item in sorted(stage.iterdir()):
            os.replace(item, target / item.name)
    except BaseException:
        if created and target.exists():
            shutil.rmtree(target, ignore_errors=True)
        raise
    finally:
        shutil.rmtree(stage, ignore_errors=True)


def _write_vtk(mesh, values, path: Path, name: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_field(mesh, values, "vtk", fh, name=name)


def _fmt(x: float) -> str:
    return f"{x:.10g}"


# -- commands ----------------------------------------------------------------


def cmd_basis(args) -> int:
    mesh = read_mesh(_existing(args.mesh, "mesh"))
    _check_num(args.num, mesh.n_vertices)
    basis = mesh_basis(mesh, args.num, args.normalization)
    with _atomic_file(args.out) as tmp:
        basis.save(tmp)
    head = ", ".join(_fmt(v) for v in basis.eigenvalues[:5])
    print(f"n={basis.n}, i_max={basis.i_max}")
    print(f"first eigenvalues: {head}")
    return 0


def cmd_slepian(args) -> int:
    basis_path = _existing(args.basis, "basis")
    region_path = _existing(args.region, "region")
    basis = _load_basis(basis_path)
    region = load_region(basis.n, region_path)
    sbasis = slepian_basis(basis, region)
    with _atomic_file(args.out) as tmp:
        sbasis.save(tmp)
    mu = sbasis.eigenvalues
    print(f"N={sbasis.shannon} (exact {_fmt(sbasis.shannon_exact)}), i_max={sbasis.i_max}")
    print(f"mu_1={_fmt(mu[0])}, count(mu>0.5)={int(np.sum(mu > 0.5))}")
    return 0


def cmd_tile(args) -> int:
    _check_scales(args.lam, args.jmin, args.bandlimit)
    kernels = build_kernels(args.lam, args.jmin, args.bandlimit)
    with _atomic_file(args.out) as tmp:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            write_kernels_csv(kernels, fh)
    print(f"J={kernels.J}, nonzero={kernels.n_nonzero}")
    return 0


def cmd_transform(args) -> int:
    mesh = read_mesh(_existing(args.mesh, "mesh"))
    basis_path = _existing(args.basis, "basis")
    slepian_path = _existing(args.slepian, "Slepian basis")
    field_path = _existing(args.field, "field") if args.field else None
    basis = _load_basis(basis_path)
    _check_basis_mesh(basis, mesh, basis_path)
    sbasis = _load_slepian(slepian_path)
    _check_slepian_basis(sbasis, basis, slepian_path)
    N = sbasis.shannon
    _check_scales(args.lam, args.jmin, N)

    if field_path is None:
        field = vertex_normal_z_field(mesh)
    else:
        field = read_field_csv(field_path)
        if field.shape != (mesh.n_vertices,):
            raise UsageError(f"{field_path} has {field.size} values, the mesh has {mesh.n_vertices}")
    kernels = build_kernels(args.lam, args.jmin, N)
    f = slepian_analysis(basis, sbasis, field, "global", N)
    w = analysis(kernels, f)
    hashes = {"basis_sha256": basis.digest.hex(), "slepian_sha256": sbasis.digest.hex()}
    with _atomic_dir(args.out) as stage:
        write_bundle(kernels, w, stage, hashes)
        _write_vtk(mesh, slepian_synthesis(basis, sbasis, f), stage / "field.vtk", "field")
        for label in ["scaling", *kernels.scales]:
            name = "scaling" if label == "scaling" else f"wavelet_{label}"
            _write_vtk(mesh, coefficient_field(basis, sbasis, w, label), stage / f"{name}.vtk", name)
    print(f"N={N}, J={kernels.J}, nonzero={kernels.n_nonzero}")
    return 0


def cmd_denoise(args) -> int:
    # imported here: pulls in the denoising module only for this command
    from .pipeline import prepare, run_denoising

    mesh_path = _existing(args.mesh, "mesh")
    region_path = _existing(args.region, "region")
    basis_path = _existing(args.basis, "basis") if args.basis else None
    slepian_path = _existing(args.slepian, "Slepian basis") if args.slepian else None
    if args.nsigma < 0:
        raise UsageError(f"--nsigma must be non-negative, got {args.nsigma}")

    mesh = read_mesh(mesh_path)
    _check_num(args.num, mesh.n_vertices)
    region = load_region(mesh, region_path)
    basis = sbasis = None
    if basis_path is not None:
        basis = _load_basis(basis_path)
        _check_basis_mesh(basis, mesh, basis_path)
        if basis.i_max != args.num:
            raise UsageError(f"{basis_path} has i_max={basis.i_max}, --num is {args.num}")
    if slepian_path is not None:
        if basis is None:
            raise UsageError("--slepian needs --basis")
        sbasis = _load_slepian(slepian_path)
        _check_slepian_basis(sbasis, basis, slepian_path)
        if sbasis.region_digest != region.digest:
            raise UsageError(f"{slepian_path} was built for a different region (hash mismatch)")

    if basis is None:
        basis = mesh_basis(mesh, args.num)
    if sbasis is None:
        sbasis = slepian_basis(basis, region)
    _check_scales(args.lam, args.jmin, sbasis.shannon)
    setup = prepare(mesh, region, args.num, args.lam, args.jmin, basis=basis, sbasis=sbasis)

    with _atomic_dir(args.out) as stage:
        run = run_denoising(setup, args.nsigma, args.snr, args.seed)
        basis, sbasis, kernels = setup.basis, setup.sbasis, setup.kernels

        _write_vtk(mesh, slepian_synthesis(basis, sbasis, setup.signal), stage / "signal.vtk", "signal")
        _write_vtk(mesh, slepian_synthesis(basis, sbasis, run.noisy), stage / "noisy.vtk", "noisy")
        _write_vtk(mesh, slepian_synthesis(basis, sbasis, run.denoised), stage / "denoised.vtk", "denoised")
        noisy_w = analysis(kernels, run.noisy)
        for label in ["scaling", *kernels.scales]:
            name = "scaling" if label == "scaling" else f"wavelet_{label}"
            values = coefficient_field(basis, sbasis, noisy_w, label)
            _write_vtk(mesh, values, stage / f"coeff_{name}.vtk", name)

        report = dict(run.report)
        report.update(
            {
                "lambda": args.lam,
                "j0": args.jmin,
                "J": kernels.J,
                "i_max": basis.i_max,
                "n_vertices": mesh.n_vertices,
                "region_vertices": len(region),
                "basis_sha256": basis.digest.hex(),
                "slepian_sha256": sbasis.digest.hex(),
                "kernel_sha256": kernels.digest.hex(),
            }
        )
        text = json.dumps(report, indent=2, sort_keys=True, allow_nan=True) + "\n"
        (stage / "report.json").write_text(text, encoding="utf-8")
    r = run.report
    print(
        f"N={r['shannon_number']}, nonzero={r['nonzero_functions']}, "
        f"snr_in={_fmt(r['snr_in_db'])} dB, snr_out={_fmt(r['snr_out_db'])} dB, "
        f"boost={_fmt(r['boost_db'])} dB"
    )
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="meshwav", description="Slepian wavelets on triangle meshes.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("basis", help="eigenbasis of the cotangent Laplacian")
    p.add_argument("--mesh", required=True, help="OFF, OBJ or ASCII PLY triangle mesh")
    p.add_argument("--num", required=True, type=_positive_int, help="number of eigenpairs i_max")
    p.add_argument("--out", required=True, help="output basis file")
    p.add_argument(
        "--normalization",
        default="geometric",
        choices=["geometric", "unit-mass", "random-walk"],
        help="mass matrix (default: geometric vertex areas)",
    )
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("slepian", help="Slepian basis of a region")
    p.add_argument("--basis", required=True, help="basis file written by 'basis'")
    p.add_argument("--region", required=True, help='JSON file {"vertices": [...]}')
    p.add_argument("--out", required=True, help="output Slepian file")
    p.set_defaults(func=cmd_slepian)

    p = sub.add_parser("tile", help="wavelet kernels on the Slepian line")
    p.add_argument("--lambda", dest="lam", required=True, type=_dilation, help="dilation parameter > 1")
    p.add_argument("--jmin", required=True, type=_nonneg_int, help="lowest wavelet scale J0")
    p.add_argument("--bandlimit", required=True, type=_positive_int, help="Slepian bandlimit N")
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_tile)

    p = sub.add_parser("transform", help="wavelet analysis of a field")
    p.add_argument("--mesh", required=True)
    p.add_argument("--basis", required=True)
    p.add_argument("--slepian", required=True)
    p.add_argument("--lambda", dest="lam", required=True, type=_dilation)
    p.add_argument("--jmin", required=True, type=_nonneg_int)
    p.add_argument("--field", help="per-vertex CSV field (default: z-component of vertex normals)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("denoise", help="end-to-end denoising experiment")
    p.add_argument("--mesh", required=True)
    p.add_argument("--region", required=True)
    p.add_argument("--num", required=True, type=_positive_int)
    p.add_argument("--lambda", dest="lam", required=True, type=_dilation)
    p.add_argument("--jmin", required=True, type=_nonneg_int)
    p.add_argument("--nsigma", required=True, type=_finite)
    p.add_argument("--snr", required=True, type=_finite, help="target input SNR in dB")
    p.add_argument("--seed", required=True, type=_seed)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--basis", help="reuse a basis file instead of recomputing")
    p.add_argument("--slepian", help="reuse a Slepian file (requires --basis)")
    p.set_defaults(func=cmd_denoise)
    return parser


def _thread_limit():
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return nullcontext()
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"meshwav: warning: {message}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        with _thread_limit(), warnings.catch_warnings():
            warnings.showwarning = _show_warning
            return args.func(args)
    except UsageError as exc:
        print(f"meshwav: error: {exc}", file=sys.stderr)
        return 2
    except (IdentityMismatch, MeshError, ValueError, RuntimeError, OSError, np.linalg.LinAlgError) as exc:
        print(f"meshwav: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
