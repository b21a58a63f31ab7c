"""Pure-Python (numpy) implementations of the hot kernels.

These mirror ``_kernels.pyx`` exactly in signature and semantics; the
selector in :mod:`conecontact.kernels` picks one at import time.
"""

import numpy as np

OPTIMAL = 0
ITERATION_LIMIT = 1
UNBOUNDED = 2

_MASK = (1 << 64) - 1


def basis_key(j: int) -> int:
    """splitmix64 of a column index; XOR of these hashes a basis as a set."""
    z = (j + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def simplex_pivot_loop(T, basis, tol, max_iter, force_bland=False):
    """Primal simplex pivots on a tableau in place.

    ``T`` has one row per constraint plus a final reduced-cost row; its last
    column is the right-hand side. ``basis[i]`` is the column basic in row i.

    Pricing is steepest edge: the entering column maximises
    ``c_j^2 / (1 + |T[:m, j]|^2)``, first index on ties. Ratio ties go to the
    largest pivot element. Plain Dantzig pricing stalls for tens of thousands
    of degenerate pivots on badly scaled Farkas systems.

    A basis revisited within one run of degenerate pivots means cycling;
    from then on Bland's rule (lowest entering index, lowest leaving basis
    index) is used, which cannot cycle.

    ``force_bland`` uses Bland's rule from the first pivot.

    Returns ``(status, iterations, used_bland)``.
    """
    m = T.shape[0] - 1
    ncols = T.shape[1] - 1
    it = 0
    bland = bool(force_bland)
    h = 0
    for b in basis:
        h ^= basis_key(int(b))
    seen = {h}
    while True:
        costs = T[m, :ncols]
        neg = np.flatnonzero(costs < -tol)
        if neg.size == 0:
            return OPTIMAL, it, bland
        if it >= max_iter:
            return ITERATION_LIMIT, it, bland
        j = int(neg[0]) if bland else _steepest(T, m, ncols, neg)
        col = T[:m, j]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            return UNBOUNDED, it, bland
        ratios = np.maximum(T[rows, ncols], 0.0) / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        if bland:
            i = int(ties[np.argmin(basis[ties])])
        else:
            top = col[ties].max()
            ties = ties[col[ties] == top]
            i = int(ties[np.argmin(basis[ties])])
        h ^= basis_key(int(basis[i])) ^ basis_key(j)
        _pivot(T, i, j)
        basis[i] = j
        it += 1
        if not bland:
            if best > 1e-12 * max(1.0, abs(best)):
                seen = {h}
            elif h in seen:
                bland = True
            else:
                seen.add(h)


def _steepest(T, m, ncols, neg):
    # row-by-row accumulation matches the compiled kernel's rounding
    w = np.ones(ncols)
    for i in range(m):
        w += T[i, :ncols] * T[i, :ncols]
    c = T[m, neg]
    return int(neg[np.argmax(c * c / w[neg])])


def _pivot(T, i, j):
    T[i] /= T[i, j]
    col = T[:, j].copy()
    col[i] = 0.0
    T -= np.outer(col, T[i])


def pfaffian_batch(A):
    """Pfaffians of a stack of antisymmetric matrices, shape (N, n, n).

    Parlett-Reid elimination with partial pivoting, vectorised over the
    stack. Odd ``n`` yields zeros.
    """
    A = np.array(A, dtype=np.float64, copy=True)
    N, n, _ = A.shape
    if n % 2 == 1:
        return np.zeros(N)
    pf = np.ones(N)
    idx = np.arange(N)
    for k in range(0, n - 1, 2):
        kp = k + 1 + np.argmax(np.abs(A[:, k + 1:, k]), axis=1)
        swap = kp != k + 1
        if swap.any():
            s = idx[swap]
            r = kp[swap]
            rows_k1 = A[s, k + 1, :].copy()
            A[s, k + 1, :] = A[s, r, :]
            A[s, r, :] = rows_k1
            cols_k1 = A[s, :, k + 1].copy()
            A[s, :, k + 1] = A[s, :, r]
            A[s, :, r] = cols_k1
            pf[swap] *= -1.0
        piv = A[:, k, k + 1]
        zero = piv == 0.0
        pf *= piv
        if k + 2 < n:
            safe = np.where(zero, 1.0, piv)
            tau = A[:, k, k + 2:] / safe[:, None]
            w = A[:, k + 2:, k + 1]
            A[:, k + 2:, k + 2:] += (
                tau[:, :, None] * w[:, None, :] - w[:, :, None] * tau[:, None, :]
            )
    return pf
