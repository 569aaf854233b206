#!/usr/bin/env python3
"""Regenerate the bundled triangle meshes in assets/.

Three geometries at three refinement levels each: a unit-radius disk, a
square plate with a circular hole, and a slender airfoil-like region with
strong chordwise grading (fine near the tips, coarse midchord).  All three
use characteristic length L = 2 (diameter / edge length / chord).

Everything is deterministic; rerunning reproduces the same files.  Each mesh
is validated and its Jacobi iteration matrix is checked to have spectral
radius < 1 so the bundled problems are solvable by every controller.
"""

import pathlib
import sys

import numpy as np
import scipy.sparse.linalg
from scipy.spatial import Delaunay

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from srj.problems import Mesh, assemble_fem_poisson, validate_mesh, write_mesh  # noqa: E402

ASSETS = pathlib.Path(__file__).resolve().parent.parent / "assets"


def ccw(tris, pts):
    p = pts[tris]
    cross = ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
             - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))
    flip = cross < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    return tris


def disk_mesh(rings: int) -> Mesh:
    """Unit disk built from hexagonal rings, Delaunay-triangulated."""
    pts = [(0.0, 0.0)]
    for k in range(1, rings + 1):
        r = k / rings
        m = 6 * k
        for j in range(m):
            a = 2.0 * np.pi * j / m
            pts.append((r * np.cos(a), r * np.sin(a)))
    pts = np.array(pts)
    tri = Delaunay(pts)
    triangles = ccw(tri.simplices.copy(), pts)
    radius = np.hypot(pts[:, 0], pts[:, 1])
    boundary = radius > 1.0 - 1e-9
    return Mesh(nodes=pts, triangles=triangles, boundary=boundary, char_length=2.0)


def plate_with_hole_mesh(m: int, hole_r: float = 0.5) -> Mesh:
    """[-1,1]^2 grid minus a central hole, with matched points on the rim."""
    h = 2.0 / m
    xs = np.linspace(-1.0, 1.0, m + 1)
    pts = []
    for y in xs:
        for x in xs:
            d = np.hypot(x, y)
            if d >= hole_r + 0.5 * h:  # leave a clean margin around the rim
                pts.append((x, y))
    n_rim = int(np.ceil(2.0 * np.pi * hole_r / h))
    for j in range(n_rim):
        a = 2.0 * np.pi * (j + 0.5) / n_rim
        pts.append((hole_r * np.cos(a), hole_r * np.sin(a)))
    pts = np.array(pts)
    tri = Delaunay(pts)
    triangles = tri.simplices.copy()
    centroids = pts[triangles].mean(axis=1)
    keep = np.hypot(centroids[:, 0], centroids[:, 1]) > hole_r
    triangles = ccw(triangles[keep], pts)
    on_square = (np.abs(np.abs(pts[:, 0]) - 1.0) < 1e-9) | (np.abs(np.abs(pts[:, 1]) - 1.0) < 1e-9)
    on_rim = np.abs(np.hypot(pts[:, 0], pts[:, 1]) - hole_r) < 1e-9
    return Mesh(nodes=pts, triangles=triangles, boundary=on_square | on_rim,
                char_length=2.0)


def airfoil_mesh(nx: int, thickness: float = 0.16) -> Mesh:
    """Slender airfoil-like region over chord [0, 2].

    Columns are cosine-clustered along the chord (fine near nose and tail),
    each column carries uniformly spaced points through the thickness, and
    consecutive columns are stitched with a two-pointer strip triangulation.
    The strong nonuniformity is the point: spacing spans roughly a factor of
    ten between tip and midchord.
    """
    def half_thickness(u):
        return 2.0 * thickness * u**0.5 * (1.0 - u) ** 0.85

    us = (1.0 - np.cos(np.pi * np.arange(nx + 1) / nx)) / 2.0
    dy_target = 2.0 * half_thickness(0.5) / max(3, nx // 6)
    columns = []
    pts = []
    for u in us:
        x = 2.0 * u
        t = half_thickness(u)
        if t < 1e-12:
            idx = [len(pts)]
            pts.append((x, 0.0))
        else:
            m = max(2, int(round(2.0 * t / dy_target)) + 1)
            ys = np.linspace(-t, t, m)
            idx = list(range(len(pts), len(pts) + m))
            pts.extend((x, y) for y in ys)
        columns.append(idx)
    triangles = []
    for left, right in zip(columns, columns[1:]):
        i, j = 0, 0
        while i < len(left) - 1 or j < len(right) - 1:
            advance_left = False
            if j == len(right) - 1:
                advance_left = True
            elif i < len(left) - 1:
                # pick the shorter new diagonal
                d_left = np.hypot(*(np.subtract(pts[left[i + 1]], pts[right[j]])))
                d_right = np.hypot(*(np.subtract(pts[right[j + 1]], pts[left[i]])))
                advance_left = d_left <= d_right
            if advance_left:
                triangles.append((left[i], right[j], left[i + 1]))
                i += 1
            else:
                triangles.append((left[i], right[j], right[j + 1]))
                j += 1
    pts = np.array(pts)
    triangles = ccw(np.array(triangles, dtype=int), pts)
    boundary = np.zeros(len(pts), dtype=bool)
    for idx in columns:
        boundary[idx[0]] = boundary[idx[-1]] = True
    return Mesh(nodes=pts, triangles=triangles, boundary=boundary, char_length=2.0)


def check(mesh: Mesh, name: str) -> None:
    validate_mesh(mesh)
    problem = assemble_fem_poisson(mesh)
    A = problem.A.scipy_csr()
    d = A.diagonal()
    sym = scipy.sparse.diags(1.0 / np.sqrt(d)) @ (scipy.sparse.diags(d) - A) \
        @ scipy.sparse.diags(1.0 / np.sqrt(d))
    rho = abs(scipy.sparse.linalg.eigsh(sym, k=1, which="LM",
                                        return_eigenvectors=False)[0])
    interior = problem.n
    lengths_ratio = _edge_span(mesh)
    print(f"{name:22s} nodes={mesh.num_nodes:5d} tris={mesh.num_triangles:5d} "
          f"dof={interior:5d} rho_J={rho:.6f} h_max/h_min={lengths_ratio:.1f}")
    if rho >= 1.0:
        raise SystemExit(f"{name}: Jacobi iteration would not converge")


def _edge_span(mesh):
    from srj.problems import edge_lengths
    lengths = edge_lengths(mesh)
    return lengths.max() / lengths.min()


def main():
    ASSETS.mkdir(exist_ok=True)
    jobs = [
        ("disk.mesh", disk_mesh(6)),
        ("disk_med.mesh", disk_mesh(12)),
        ("disk_fine.mesh", disk_mesh(24)),
        ("plate_hole.mesh", plate_with_hole_mesh(10)),
        ("plate_hole_med.mesh", plate_with_hole_mesh(20)),
        ("plate_hole_fine.mesh", plate_with_hole_mesh(40)),
        ("airfoil.mesh", airfoil_mesh(24)),
        ("airfoil_med.mesh", airfoil_mesh(48)),
        ("airfoil_fine.mesh", airfoil_mesh(96)),
    ]
    for name, mesh in jobs:
        check(mesh, name)
        write_mesh(str(ASSETS / name), mesh)
    print(f"wrote {len(jobs)} meshes to {ASSETS}")


if __name__ == "__main__":
    main()
