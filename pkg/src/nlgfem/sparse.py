"""Hand-rolled sparse symmetric CSR storage and Jacobi-preconditioned CG."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class SparseSymMatrix:
    """CSR matrix assumed numerically symmetric (enforced by assembly)."""

    n: int
    indptr: np.ndarray   # [n+1]
    indices: np.ndarray  # column ids, ascending within each row
    values: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    @classmethod
    def from_triplets(cls, n, rows, cols, vals) -> "SparseSymMatrix":
        """Build CSR from COO triplets, summing duplicates."""
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=float).ravel()
        order = np.lexsort((cols, rows))
        r, c, v = rows[order], cols[order], vals[order]
        if r.size == 0:
            return cls(n, np.zeros(n + 1, dtype=np.int64),
                       np.empty(0, dtype=np.int64), np.empty(0))
        new = np.empty(r.size, dtype=bool)
        new[0] = True
        new[1:] = (r[1:] != r[:-1]) | (c[1:] != c[:-1])
        starts = np.flatnonzero(new)
        rr, cc = r[starts], c[starts]
        vv = np.add.reduceat(v, starts)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rr, minlength=n), out=indptr[1:])
        return cls(n, indptr, cc, vv)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"expected vector of length {self.n}")
        prod = self.values * x[self.indices]
        rowlen = np.diff(self.indptr)
        if rowlen.min(initial=1) > 0:
            return np.add.reduceat(prod, self.indptr[:-1])
        y = np.zeros(self.n)
        nz = rowlen > 0
        y[nz] = np.add.reduceat(prod, self.indptr[:-1][nz])
        return y

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.n)
        for i in range(self.n):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            j = np.searchsorted(self.indices[lo:hi], i)
            if j < hi - lo and self.indices[lo + j] == i:
                d[i] = self.values[lo + j]
        return d

    def todense(self) -> np.ndarray:
        """Dense copy for small test matrices only."""
        if self.n > 20000:
            raise MemoryError("dense conversion guarded to small matrices")
        out = np.zeros((self.n, self.n))
        for i in range(self.n):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            out[i, self.indices[lo:hi]] = self.values[lo:hi]
        return out


def matvec(A: SparseSymMatrix, x) -> np.ndarray:
    return A.matvec(x)


@dataclass
class CGResult:
    c: np.ndarray
    iters: int
    residual: float              # final ||A c - f|| / ||f||
    converged: bool
    history: list = field(default_factory=list)  # preconditioned residual norms


def cg_solve(A: SparseSymMatrix, f, rel_tol: float = 1e-10,
             max_iter: int | None = None) -> CGResult:
    """Jacobi-preconditioned conjugate gradients for SPD A.

    Stops when ||A c - f||_2 <= rel_tol * ||f||_2; history records the
    M^{-1}-norm of the residual each iteration for monotonicity checks.
    """
    if not 0 < rel_tol < 1:
        raise ValueError("rel_tol must lie in (0, 1)")
    f = np.asarray(f, dtype=float)
    if max_iter is None:
        max_iter = 10 * A.n
    d = A.diagonal()
    if np.any(d <= 0):
        raise ValueError("non-positive diagonal entry; matrix not SPD")
    fnorm = np.linalg.norm(f)
    x = np.zeros(A.n)
    if fnorm == 0.0:
        return CGResult(x, 0, 0.0, True, [0.0])
    r = f.copy()
    z = r / d
    rz = r @ z
    p = z.copy()
    history = [float(np.sqrt(rz))]
    it = 0
    converged = False
    while it < max_iter:
        Ap = A.matvec(p)
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        it += 1
        z = r / d
        rz_new = r @ z
        history.append(float(np.sqrt(max(rz_new, 0.0))))
        if np.linalg.norm(r) <= rel_tol * fnorm:
            converged = True
            break
        p = z + (rz_new / rz) * p
        rz = rz_new
    resid = float(np.linalg.norm(A.matvec(x) - f) / fnorm)
    return CGResult(x, it, resid, converged, history)
