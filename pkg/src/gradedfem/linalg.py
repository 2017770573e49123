"""Sparse symmetric linear algebra: CSR storage and preconditioned CG.

Kept deliberately small: the systems are symmetric positive definite
stiffness-plus-mass matrices, so Jacobi-preconditioned CG is all we need.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NotSpdError, PreconditionerError


@dataclass(frozen=True)
class SparseMatrixCSR:
    row_offsets: np.ndarray  # (n+1,) int
    col_indices: np.ndarray  # (nnz,) int, sorted within each row
    values: np.ndarray       # (nnz,) float
    n: int

    def __post_init__(self):
        for arr in (self.row_offsets, self.col_indices, self.values):
            arr.setflags(write=False)

    @property
    def nnz(self) -> int:
        return len(self.values)

    def diagonal(self) -> np.ndarray:
        rows = np.repeat(np.arange(self.n), np.diff(self.row_offsets))
        diag = np.zeros(self.n)
        hit = self.col_indices == rows
        diag[rows[hit]] = self.values[hit]
        return diag

    def to_dense(self) -> np.ndarray:
        rows = np.repeat(np.arange(self.n), np.diff(self.row_offsets))
        dense = np.zeros((self.n, self.n))
        dense[rows, self.col_indices] = self.values
        return dense

    def validate(self) -> None:
        if len(self.row_offsets) != self.n + 1 or self.row_offsets[0] != 0:
            raise ValueError("malformed row_offsets")
        if np.any(np.diff(self.row_offsets) < 0):
            raise ValueError("row_offsets must be nondecreasing")
        rows = np.repeat(np.arange(self.n), np.diff(self.row_offsets))
        same_row = rows[1:] == rows[:-1]
        if np.any(same_row & (np.diff(self.col_indices) <= 0)):
            raise ValueError("column indices must be strictly increasing per row")


def csr_from_coo(n: int, rows: np.ndarray, cols: np.ndarray, vals: np.ndarray,
                 drop_tol: float = 1e-300) -> SparseMatrixCSR:
    """Merge COO triplets into CSR deterministically (stable sort by row, col)."""
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    boundary = np.ones(len(rows), dtype=bool)
    boundary[1:] = (np.diff(rows) != 0) | (np.diff(cols) != 0)
    starts = np.nonzero(boundary)[0]
    merged = np.add.reduceat(vals, starts) if len(starts) else vals[:0]
    mrows, mcols = rows[starts], cols[starts]
    keep = np.abs(merged) >= drop_tol
    mrows, mcols, merged = mrows[keep], mcols[keep], merged[keep]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(mrows, minlength=n), out=offsets[1:])
    return SparseMatrixCSR(row_offsets=offsets, col_indices=mcols.astype(np.int64),
                           values=merged.astype(float), n=n)


def csr_add(a: SparseMatrixCSR, b: SparseMatrixCSR) -> SparseMatrixCSR:
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    rows_a = np.repeat(np.arange(a.n), np.diff(a.row_offsets))
    rows_b = np.repeat(np.arange(b.n), np.diff(b.row_offsets))
    return csr_from_coo(a.n,
                        np.concatenate([rows_a, rows_b]),
                        np.concatenate([a.col_indices, b.col_indices]),
                        np.concatenate([a.values, b.values]))


def spmv(a: SparseMatrixCSR, x: np.ndarray) -> np.ndarray:
    """CSR matrix-vector product with a fixed, data-independent summation order."""
    if len(x) != a.n:
        raise ValueError(f"dimension mismatch: matrix order {a.n}, vector length {len(x)}")
    products = a.values * x[a.col_indices]
    out = np.zeros(a.n)
    starts = a.row_offsets[:-1]
    nonempty = starts < a.row_offsets[1:]
    if np.any(nonempty):
        out[nonempty] = np.add.reduceat(products, starts[nonempty])
    return out


@dataclass
class CgReport:
    iterations: int
    relative_residual: float
    converged: bool


def cg_solve(a: SparseMatrixCSR, b: np.ndarray, tol: float = 1e-12,
             max_iter: int | None = None,
             x0: np.ndarray | None = None) -> tuple[np.ndarray, CgReport]:
    """Jacobi-preconditioned CG; the returned residual is recomputed explicitly.

    Raises PreconditionerError on a non-positive diagonal entry and NotSpdError
    on breakdown (p'Ap <= 0), both of which signal a broken assembly.
    """
    if tol <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if len(b) != a.n:
        raise ValueError(f"dimension mismatch: matrix order {a.n}, rhs length {len(b)}")
    if max_iter is None:
        max_iter = 10 * a.n + 100
    diag = a.diagonal()
    if np.any(diag <= 0.0):
        i = int(np.argmax(diag <= 0.0))
        raise PreconditionerError(
            f"non-positive diagonal entry A[{i},{i}] = {diag[i]}")

    norm_b = float(np.linalg.norm(b))
    if norm_b == 0.0:
        return np.zeros(a.n), CgReport(iterations=0, relative_residual=0.0, converged=True)

    x = np.zeros(a.n) if x0 is None else np.array(x0, dtype=float)
    r = b - spmv(a, x)
    z = r / diag
    p = z.copy()
    rz = float(r @ z)
    iterations = 0
    stalled = 0
    best_true = np.inf
    while iterations < max_iter and stalled < 10:
        ap = spmv(a, p)
        pap = float(p @ ap)
        if pap <= 0.0:
            raise NotSpdError(f"CG breakdown: p'Ap = {pap} at iteration {iterations}")
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        iterations += 1
        restart = False
        # Stopping decisions use explicitly recomputed residuals: every 50
        # iterations against recurrence drift, and to confirm a recurrence pass.
        if np.linalg.norm(r) <= tol * norm_b or iterations % 50 == 0:
            true_norm = float(np.linalg.norm(b - spmv(a, x)))
            if true_norm <= tol * norm_b:
                return x, CgReport(iterations=iterations,
                                   relative_residual=true_norm / norm_b,
                                   converged=True)
            stalled = stalled + 1 if true_norm >= 0.99 * best_true else 0
            best_true = min(best_true, true_norm)
            # once the recurrence detaches from the true residual, refine:
            # restart the Krylov space from the explicitly computed residual
            restart = np.linalg.norm(r) <= 0.5 * true_norm
        if restart:
            r = b - spmv(a, x)
            z = r / diag
            p = z.copy()
            rz = float(r @ z)
        else:
            z = r / diag
            rz_new = float(r @ z)
            p = z + (rz_new / rz) * p
            rz = rz_new
    true_norm = float(np.linalg.norm(b - spmv(a, x)))
    return x, CgReport(iterations=iterations, relative_residual=true_norm / norm_b,
                       converged=bool(true_norm <= tol * norm_b))
