"""CSR matrices, weighted Jacobi sweeps, residual norms, and a dense oracle.

Matrices are symmetric with a structurally present nonzero diagonal, which is
all the Jacobi splitting A = D + L + U needs.  Storage and the matrix-vector
product are delegated to scipy's CSR kernels; sweeps accumulate in float64
(the widest hardware type numpy applies uniformly) because residual-ratio
noise feeds straight into the level-selection heuristic.
"""

from __future__ import annotations

import numpy as np
import scipy.io
import scipy.sparse

SYMMETRY_RTOL = 1e-12
DENSE_ORACLE_MAX_N = 2000


class SparseMatrix:
    """Symmetric CSR matrix with cached diagonal.

    Rows are canonicalized on construction: duplicate entries are summed
    (FEM assembly emits duplicates), column indices sorted ascending.
    """

    def __init__(self, csr: scipy.sparse.csr_matrix):
        csr = csr.tocsr().astype(float)
        csr.sum_duplicates()
        csr.sort_indices()
        n, m = csr.shape
        if n != m:
            raise ValueError(f"matrix must be square, got {n}x{m}")
        diff = abs(csr - csr.T)
        scale = max(1.0, abs(csr).max() if csr.nnz else 0.0)
        if diff.nnz and diff.max() > SYMMETRY_RTOL * scale:
            raise ValueError("matrix is not symmetric")
        diag = csr.diagonal()
        if not (diag != 0.0).all():
            raise ValueError("every row needs a structurally present nonzero diagonal")
        self._csr = csr
        self.n = n
        self.diag = diag
        self.inv_diag = 1.0 / diag

    @property
    def row_ptr(self) -> np.ndarray:
        return self._csr.indptr

    @property
    def col_idx(self) -> np.ndarray:
        return self._csr.indices

    @property
    def vals(self) -> np.ndarray:
        return self._csr.data

    @property
    def nnz(self) -> int:
        return self._csr.nnz

    @classmethod
    def from_coo(cls, n: int, rows, cols, vals) -> "SparseMatrix":
        coo = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(n, n))
        return cls(coo.tocsr())

    @classmethod
    def from_dense(cls, dense) -> "SparseMatrix":
        return cls(scipy.sparse.csr_matrix(np.asarray(dense, dtype=float)))

    def to_dense(self) -> np.ndarray:
        return self._csr.toarray()

    def scipy_csr(self) -> scipy.sparse.csr_matrix:
        return self._csr


def matvec(A: SparseMatrix, x: np.ndarray) -> np.ndarray:
    if x.shape != (A.n,):
        raise ValueError(f"dimension mismatch: matrix {A.n}, vector {x.shape}")
    return A.scipy_csr().dot(x)


def weighted_jacobi_sweep(A: SparseMatrix, x: np.ndarray, b: np.ndarray,
                          omega: float) -> np.ndarray:
    """One weighted Jacobi update x + w D^{-1} (b - A x).

    Algebraically identical to (1-w) x + w D^{-1} (b - (L+U) x).
    """
    if x.shape != (A.n,) or b.shape != (A.n,):
        raise ValueError("dimension mismatch in weighted_jacobi_sweep")
    r = b - A.scipy_csr().dot(x)
    return x + omega * (A.inv_diag * r)


def residual_l2(A: SparseMatrix, x: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(b - matvec(A, x)))


def relative_residual_l2(A: SparseMatrix, x: np.ndarray, b: np.ndarray,
                         x0: np.ndarray) -> float:
    r0 = residual_l2(A, x0, b)
    if r0 == 0.0:
        raise ValueError("initial residual is zero; relative residual undefined")
    return residual_l2(A, x, b) / r0


def diff_inf(x_new: np.ndarray, x_old: np.ndarray) -> float:
    if x_new.shape != x_old.shape:
        raise ValueError("dimension mismatch in diff_inf")
    return float(np.max(np.abs(x_new - x_old))) if x_new.size else 0.0


def jacobi_iteration_matrix(A: SparseMatrix) -> np.ndarray:
    """Dense B_J = -D^{-1} (L + U); small instances only."""
    dense = A.to_dense()
    B = -(A.inv_diag[:, None]) * dense
    np.fill_diagonal(B, 0.0)
    return B


def dense_jacobi_eigenvalues(A: SparseMatrix) -> np.ndarray:
    """All eigenvalues of B_J, ascending.

    With a positive diagonal, B_J is similar to the symmetric matrix
    D^{-1/2} (-(L+U)) D^{-1/2}, so a symmetric eigensolver applies; otherwise
    fall back to the general solver and insist the spectrum is real.
    """
    if A.n > DENSE_ORACLE_MAX_N:
        raise ValueError(f"dense eigenvalue oracle limited to n <= {DENSE_ORACLE_MAX_N}")
    dense = A.to_dense()
    off = dense.copy()
    np.fill_diagonal(off, 0.0)
    if (A.diag > 0.0).all():
        s = 1.0 / np.sqrt(A.diag)
        sym = s[:, None] * (-off) * s[None, :]
        return np.linalg.eigvalsh(sym)
    eigs = np.linalg.eigvals(-(A.inv_diag[:, None]) * off)
    if np.max(np.abs(eigs.imag)) >= 1e-10:
        raise AssertionError("Jacobi iteration matrix has a non-real spectrum")
    return np.sort(eigs.real)


def write_matrix_market(path: str, A: SparseMatrix) -> None:
    scipy.io.mmwrite(path, A.scipy_csr(), symmetry="symmetric")


def read_matrix_market(path: str) -> SparseMatrix:
    mat = scipy.io.mmread(path)
    return SparseMatrix(scipy.sparse.csr_matrix(mat))
