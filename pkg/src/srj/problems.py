"""Test linear systems: structured Poisson/Laplace problems, random
diagonally dominant tridiagonals, and P1 finite elements on triangle meshes.

Each generator bundles the matrix with its right-hand side, initial guess,
the stopping norm its experiment uses, and (where a spatial discretization
exists) Jacobi-eigenvalue bounds for building comparator Chebyshev schemes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .rng import SplitMix64
from .sparse import SparseMatrix

ABSOLUTE_L2 = "absolute_l2"
RELATIVE_L2 = "relative_l2"
SOLUTION_DIFF_INF = "solution_diff_inf"

MIN_TRIANGLE_AREA = 1e-14


@dataclass
class ProblemInstance:
    A: SparseMatrix
    b: np.ndarray
    x0: np.ndarray
    stopping_norm: str
    cjm_bounds: tuple[float, float] | None = None
    label: str = ""
    # FEM problems carry one bound pair per grid-spacing statistic.
    cjm_bounds_by_spacing: dict[str, tuple[float, float]] | None = None

    def __post_init__(self):
        if self.b.shape != (self.A.n,) or self.x0.shape != (self.A.n,):
            raise ValueError("vector length does not match matrix dimension")
        if self.cjm_bounds is not None:
            lo, hi = self.cjm_bounds
            if not (-1.0 <= lo < hi < 1.0):
                raise ValueError("cjm_bounds must lie inside [-1, 1)")

    @property
    def n(self) -> int:
        return self.A.n


def poisson_1d(N: int) -> ProblemInstance:
    """Dirichlet 1D Poisson: tridiagonal (-1, 2, -1)/dx^2 with dx = 1/(N+1).

    b is all ones and the initial guess all zeros; Jacobi eigenvalues are
    cos(j pi/(N+1)), so the comparator bounds are +-cos(pi/(N+1)).
    """
    if N < 1:
        raise ValueError("N must be positive")
    dx2 = (N + 1.0) ** 2
    main = np.full(N, 2.0 * dx2)
    off = np.full(N - 1, -1.0 * dx2)
    rows = np.concatenate([np.arange(N), np.arange(N - 1), np.arange(1, N)])
    cols = np.concatenate([np.arange(N), np.arange(1, N), np.arange(N - 1)])
    vals = np.concatenate([main, off, off])
    A = SparseMatrix.from_coo(N, rows, cols, vals)
    mu = np.cos(np.pi / (N + 1))
    return ProblemInstance(
        A=A, b=np.ones(N), x0=np.zeros(N), stopping_norm=ABSOLUTE_L2,
        cjm_bounds=(-mu, mu), label=f"poisson1d:{N}",
    )


def random_tridiagonal(N: int, seed: int) -> ProblemInstance:
    """Random symmetric weakly diagonally dominant tridiagonal system.

    Off-diagonals are uniform(0,1) shared across sub/super diagonal; any row
    whose uniform(0,1) diagonal is not dominant gets it raised to the exact
    off-diagonal sum, and the first/last diagonal entries are set to twice
    their single neighbor.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    rng = SplitMix64(seed)
    off = np.array(rng.uniforms(N - 1))
    diag = np.array(rng.uniforms(N))
    neighbor_sum = np.zeros(N)
    neighbor_sum[:-1] += off
    neighbor_sum[1:] += off
    diag = np.where(diag >= neighbor_sum, diag, neighbor_sum)
    diag[0] = 2.0 * off[0]
    diag[-1] = 2.0 * off[-1]
    rows = np.concatenate([np.arange(N), np.arange(N - 1), np.arange(1, N)])
    cols = np.concatenate([np.arange(N), np.arange(1, N), np.arange(N - 1)])
    vals = np.concatenate([diag, off, off])
    A = SparseMatrix.from_coo(N, rows, cols, vals)
    return ProblemInstance(
        A=A, b=np.ones(N), x0=np.zeros(N), stopping_norm=ABSOLUTE_L2,
        cjm_bounds=None, label=f"tridiag:{N}:seed{seed}",
    )


def laplace_2d_neumann(n: int, seed: int) -> ProblemInstance:
    """2D Laplace, homogeneous Neumann all around, n x n unknowns, A x = 0.

    Second-order ghost nodes fold back onto the inward neighbor, doubling its
    coefficient on boundary rows.  Boundary rows are then scaled by the
    trapezoid weight (1/2 per boundary direction), which symmetrizes the
    matrix exactly without changing the weighted Jacobi iteration: scaling a
    row scales its residual and its diagonal alike, so D^{-1} r is untouched.
    The system is singular with the constant vector in its null space, so
    convergence is judged on the max-norm difference between consecutive
    iterates.  The initial guess is uniform random in [0,1).
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    N = n * n
    dx = 1.0 / (n + 1)
    dx2 = 1.0 / dx**2

    def idx(i, j):
        return i + n * j

    def weight(i):
        return 0.5 if i in (0, n - 1) else 1.0

    rows, cols, vals = [], [], []
    for j in range(n):
        for i in range(n):
            k = idx(i, j)
            s = weight(i) * weight(j)
            rows.append(k); cols.append(k); vals.append(4.0 * s * dx2)
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ii, jj = i + di, j + dj
                if 0 <= ii < n and 0 <= jj < n:
                    rows.append(k); cols.append(idx(ii, jj)); vals.append(-s * dx2)
                else:
                    # ghost node reflects onto the opposite (inward) neighbor
                    rows.append(k); cols.append(idx(i - di, j - dj)); vals.append(-s * dx2)
    A = SparseMatrix.from_coo(N, rows, cols, vals)
    rng = SplitMix64(seed)
    x0 = np.array(rng.uniforms(N))
    mu = (np.cos(np.pi * dx) + 1.0) / 2.0
    return ProblemInstance(
        A=A, b=np.zeros(N), x0=x0, stopping_norm=SOLUTION_DIFF_INF,
        cjm_bounds=(-mu, mu), label=f"laplace2d:{n}:seed{seed}",
    )


def poisson_3d(n: int) -> ProblemInstance:
    """3D Poisson, Dirichlet on all faces, n^3 unknowns, f = 1.

    Seven-point stencil 6/dx^2 on the diagonal, -1/dx^2 for present
    neighbors; convergence is judged on the relative L2 residual.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    N = n**3
    dx2 = (n + 1.0) ** 2
    ids = np.arange(N)
    i = ids % n
    j = (ids // n) % n
    k = ids // (n * n)
    rows = [ids]
    cols = [ids]
    vals = [np.full(N, 6.0 * dx2)]
    for axis_idx, stride in ((i, 1), (j, n), (k, n * n)):
        for sign in (+1, -1):
            mask = (axis_idx + sign >= 0) & (axis_idx + sign < n)
            rows.append(ids[mask])
            cols.append(ids[mask] + sign * stride)
            vals.append(np.full(mask.sum(), -dx2))
    A = SparseMatrix.from_coo(N, np.concatenate(rows), np.concatenate(cols),
                              np.concatenate(vals))
    mu = np.cos(np.pi / (n + 1))
    return ProblemInstance(
        A=A, b=np.ones(N), x0=np.zeros(N), stopping_norm=RELATIVE_L2,
        cjm_bounds=(-mu, mu), label=f"poisson3d:{n}",
    )


# --------------------------------------------------------------------------
# Triangle meshes and P1 finite elements
# --------------------------------------------------------------------------

@dataclass
class Mesh:
    """2D triangle mesh: node coordinates, CCW triangles, boundary flags."""

    nodes: np.ndarray              # (num_nodes, 2)
    triangles: np.ndarray          # (num_triangles, 3) int
    boundary: np.ndarray           # (num_nodes,) bool
    char_length: float = 1.0       # domain length scale L from the file header

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.triangles = np.asarray(self.triangles, dtype=int)
        self.boundary = np.asarray(self.boundary, dtype=bool)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)


def triangle_signed_areas(mesh: Mesh) -> np.ndarray:
    p = mesh.nodes[mesh.triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def _edge_counts(triangles: np.ndarray) -> dict[tuple[int, int], int]:
    counts: dict[tuple[int, int], int] = {}
    for tri in triangles:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (min(a, b), max(a, b))
            counts[key] = counts.get(key, 0) + 1
    return counts


def validate_mesh(mesh: Mesh) -> None:
    """Raise ValueError on any violated mesh invariant."""
    if mesh.triangles.size and (mesh.triangles.min() < 0
                                or mesh.triangles.max() >= mesh.num_nodes):
        raise ValueError("triangle refers to a node out of range")
    if len(mesh.boundary) != mesh.num_nodes:
        raise ValueError("boundary flag array length mismatch")
    areas = triangle_signed_areas(mesh)
    if (areas <= MIN_TRIANGLE_AREA).any():
        bad = int(np.argmin(areas))
        raise ValueError(f"degenerate or misoriented triangle {bad} (area {areas[bad]:g})")
    counts = _edge_counts(mesh.triangles)
    if any(c > 2 for c in counts.values()):
        raise ValueError("an edge is shared by more than two triangles")
    on_boundary_edge = np.zeros(mesh.num_nodes, dtype=bool)
    for (a, b), c in counts.items():
        if c == 1:
            if not (mesh.boundary[a] and mesh.boundary[b]):
                raise ValueError(f"boundary edge ({a},{b}) has an unflagged endpoint")
            on_boundary_edge[a] = on_boundary_edge[b] = True
    flagged = np.flatnonzero(mesh.boundary)
    missing = [int(i) for i in flagged if not on_boundary_edge[i]]
    if missing:
        raise ValueError(f"flagged boundary nodes not on any boundary edge: {missing[:5]}")


def read_mesh(path: str) -> Mesh:
    """Read the plain-text mesh format.

    Line 1: ``mesh v1 L=<real>``; line 2: ``<num_nodes> <num_triangles>``;
    node lines ``x y boundary_flag``; triangle lines ``i j k`` (0-based).
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("mesh v1"):
        raise ValueError(f"{path}: not a 'mesh v1' file")
    header = lines[0].split()
    length = None
    for tok in header[2:]:
        if tok.startswith("L="):
            length = float(tok[2:])
    if length is None:
        raise ValueError(f"{path}: header missing L=<real>")
    n_nodes, n_tris = (int(t) for t in lines[1].split())
    if len(lines) != 2 + n_nodes + n_tris:
        raise ValueError(f"{path}: expected {2 + n_nodes + n_tris} lines, got {len(lines)}")
    nodes = np.empty((n_nodes, 2))
    boundary = np.zeros(n_nodes, dtype=bool)
    for i, ln in enumerate(lines[2:2 + n_nodes]):
        x, y, flag = ln.split()
        nodes[i] = (float(x), float(y))
        boundary[i] = flag == "1"
    triangles = np.empty((n_tris, 3), dtype=int)
    for t, ln in enumerate(lines[2 + n_nodes:]):
        triangles[t] = [int(tok) for tok in ln.split()]
    mesh = Mesh(nodes=nodes, triangles=triangles, boundary=boundary, char_length=length)
    validate_mesh(mesh)
    return mesh


def write_mesh(path: str, mesh: Mesh) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"mesh v1 L={mesh.char_length:.17g}\n")
        fh.write(f"{mesh.num_nodes} {mesh.num_triangles}\n")
        for (x, y), flag in zip(mesh.nodes, mesh.boundary):
            fh.write(f"{x:.17g} {y:.17g} {1 if flag else 0}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"{i} {j} {k}\n")


def p1_local_stiffness(p0, p1, p2) -> np.ndarray:
    """Local P1 stiffness for one CCW triangle: (b b^T + c c^T)/(4 area)."""
    x = np.array([p0[0], p1[0], p2[0]])
    y = np.array([p0[1], p1[1], p2[1]])
    b = np.array([y[1] - y[2], y[2] - y[0], y[0] - y[1]])
    c = np.array([x[2] - x[1], x[0] - x[2], x[1] - x[0]])
    area = 0.5 * ((x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]))
    return (np.outer(b, b) + np.outer(c, c)) / (4.0 * area)


def edge_lengths(mesh: Mesh) -> np.ndarray:
    edges = set()
    for tri in mesh.triangles:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            edges.add((min(a, b), max(a, b)))
    e = np.array(sorted(edges))
    return np.linalg.norm(mesh.nodes[e[:, 0]] - mesh.nodes[e[:, 1]], axis=1)


def assemble_fem_poisson(mesh: Mesh) -> ProblemInstance:
    """P1 stiffness for -laplace(u) = 1 with zero Dirichlet boundary values.

    Assembles over all nodes, then eliminates boundary rows/columns; the load
    contributes area/3 per vertex and the boundary lift vanishes.  Comparator
    bounds are derived per grid-spacing statistic h as +-cos(pi h / L).
    """
    validate_mesh(mesh)
    areas = triangle_signed_areas(mesh)
    nn = mesh.num_nodes
    rows, cols, vals = [], [], []
    load = np.zeros(nn)
    for tri, area in zip(mesh.triangles, areas):
        p = mesh.nodes[tri]
        k_local = p1_local_stiffness(p[0], p[1], p[2])
        for a in range(3):
            load[tri[a]] += area / 3.0
            for b in range(3):
                rows.append(tri[a]); cols.append(tri[b]); vals.append(k_local[a, b])
    full = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(nn, nn)).tocsr()
    interior = np.flatnonzero(~mesh.boundary)
    if interior.size == 0:
        raise ValueError("mesh has no interior nodes")
    A = SparseMatrix(full[interior][:, interior].tocsr())
    b = load[interior]
    lengths = edge_lengths(mesh)
    L = mesh.char_length
    variants = {}
    for name, h in (("min", lengths.min()), ("max", lengths.max()),
                    ("mean", float(lengths.mean()))):
        mu = float(np.cos(np.pi * h / L))
        if mu > 0.0:  # spacings at or above L/2 give no usable bound
            variants[name] = (-mu, mu)
    return ProblemInstance(
        A=A, b=b, x0=np.zeros(interior.size), stopping_norm=ABSOLUTE_L2,
        cjm_bounds=variants.get("mean"), cjm_bounds_by_spacing=variants or None,
        label=f"fem:{nn}nodes",
    )


def perturbed_mesh(nx: int, ny: int, jitter: float, seed: int) -> Mesh:
    """Structured unit-square triangulation with jittered interior nodes.

    Interior nodes move by uniform(-jitter, jitter) times the local spacing;
    boundary nodes stay put.  Draws producing a degenerate triangle are
    retried (fresh jitter) up to 100 times.
    """
    if nx < 2 or ny < 2:
        raise ValueError("nx and ny must be at least 2")
    if not 0.0 <= jitter <= 0.49:
        raise ValueError("jitter must lie in [0, 0.49]")
    hx, hy = 1.0 / (nx - 1), 1.0 / (ny - 1)
    rng = SplitMix64(seed)
    base = np.empty((nx * ny, 2))
    boundary = np.zeros(nx * ny, dtype=bool)
    for j in range(ny):
        for i in range(nx):
            k = j * nx + i
            base[k] = (i * hx, j * hy)
            boundary[k] = i in (0, nx - 1) or j in (0, ny - 1)
    tris = []
    for j in range(ny - 1):
        for i in range(nx - 1):
            k = j * nx + i
            tris.append((k, k + 1, k + nx + 1))
            tris.append((k, k + nx + 1, k + nx))
    triangles = np.array(tris, dtype=int)
    for _ in range(100):
        nodes = base.copy()
        for k in np.flatnonzero(~boundary):
            nodes[k, 0] += (2.0 * rng.uniform() - 1.0) * jitter * hx
            nodes[k, 1] += (2.0 * rng.uniform() - 1.0) * jitter * hy
        mesh = Mesh(nodes=nodes, triangles=triangles, boundary=boundary, char_length=1.0)
        if (triangle_signed_areas(mesh) > MIN_TRIANGLE_AREA).all():
            validate_mesh(mesh)
            return mesh
    raise RuntimeError("could not jitter mesh without degenerate triangles")
