"""Exact Gaussian elimination over F_{p^h} on numpy integer matrices."""

from __future__ import annotations

import numpy as np

from .errors import AmbiguousErasurePattern, InconsistentSamples
from .field import FieldCtx


def row_reduce(ctx: FieldCtx, M, ncols: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of M and its pivot columns.

    Only the first ``ncols`` columns are used as pivot candidates (all of them
    by default), which lets callers reduce an augmented matrix.
    """
    R = np.array(M, dtype=np.int64, copy=True)
    if R.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    rows, cols = R.shape
    ncols = cols if ncols is None else ncols
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            R[[r, piv]] = R[[piv, r]]
        R[r] = ctx.vmul(ctx.inv(int(R[r, c])), R[r])
        factors = R[:, c].copy()
        factors[r] = 0
        hit = np.flatnonzero(factors)
        if hit.size:
            R[hit] = ctx.vsub(R[hit], ctx.vmul(factors[hit, None], R[r][None, :]))
        pivots.append(c)
        r += 1
    return R, pivots


def rank(ctx: FieldCtx, M) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    return len(row_reduce(ctx, M)[1])


def row_basis(ctx: FieldCtx, M) -> np.ndarray:
    """Rows of the RREF spanning the row space of M."""
    M = np.asarray(M, dtype=np.int64)
    if M.size == 0:
        return M.reshape(0, M.shape[1] if M.ndim == 2 else 0)
    R, piv = row_reduce(ctx, M)
    return R[: len(piv)]


def solve(ctx: FieldCtx, A, b) -> np.ndarray:
    """Unique x with A @ x = b over the field.

    Raises:
        AmbiguousErasurePattern: A has a nontrivial kernel.
        InconsistentSamples: the system has no solution.
    """
    A = np.asarray(A, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64).reshape(-1, 1)
    unknowns = A.shape[1]
    R, piv = row_reduce(ctx, np.hstack([A, b]), ncols=unknowns)
    if len(piv) < R.shape[0] and np.any(R[len(piv):, -1]):
        raise InconsistentSamples("known symbols are not consistent with any codeword")
    if len(piv) < unknowns:
        raise AmbiguousErasurePattern(f"rank {len(piv)} < {unknowns}")
    x = np.zeros(unknowns, dtype=np.int64)
    x[piv] = R[: len(piv), -1]
    return x
