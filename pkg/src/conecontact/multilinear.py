"""Pointwise exterior algebra over R^m.

Multi-indices are strictly increasing tuples ordered as
``itertools.combinations(range(m), k)``; every coefficient array in the
package (multivectors and band-limited forms alike) uses this order, so
``<dx^I, e_J> = delta_IJ`` and pairing is a plain dot product.
"""

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .lp import phase_one

ZERO_TOL = 1e-14


@lru_cache(maxsize=None)
def multi_indices(m: int, k: int) -> tuple:
    return tuple(itertools.combinations(range(m), k))


@lru_cache(maxsize=None)
def multi_index_position(m: int, k: int) -> dict:
    return {I: n for n, I in enumerate(multi_indices(m, k))}


def sort_sign(seq):
    """Sign of the permutation sorting ``seq`` (0 if it has repeats)."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def left_wedge_matrices(m: int, k: int) -> np.ndarray:
    """``E[j]`` is the matrix of ``dx^j ^ -`` from k-forms to (k+1)-forms."""
    E = np.zeros((m, comb(m, k + 1), comb(m, k)))
    pos = multi_index_position(m, k + 1)
    for col, I in enumerate(multi_indices(m, k)):
        for j in range(m):
            if j in I:
                continue
            K = tuple(sorted((j,) + I))
            E[j, pos[K], col] = sort_sign((j,) + I)
    E.setflags(write=False)
    return E


@lru_cache(maxsize=None)
def wedge_table(m: int, p: int, q: int):
    """Nonzero products ``dx^I ^ dx^J = sign dx^K`` as index arrays."""
    pos = multi_index_position(m, p + q)
    rows = []
    for a, I in enumerate(multi_indices(m, p)):
        for b, J in enumerate(multi_indices(m, q)):
            s = sort_sign(I + J)
            if s:
                rows.append((a, b, pos[tuple(sorted(I + J))], s))
    table = np.array(rows, dtype=np.int64).reshape(-1, 4)
    table.setflags(write=False)
    return table


def compound_matrix(L, k: int) -> np.ndarray:
    """k-th compound: entry (I, J) is the minor ``det L[I, J]``."""
    L = np.asarray(L, dtype=np.float64)
    m = L.shape[0]
    idx = multi_indices(m, k)
    if k == 0:
        return np.ones((1, 1))
    C = np.empty((len(idx), len(idx)))
    for a, I in enumerate(idx):
        for b, J in enumerate(idx):
            C[a, b] = np.linalg.det(L[np.ix_(I, J)])
    return C


@dataclass(frozen=True, eq=False)
class Multivector:
    """Element of Lambda^k R^m in the multi-index basis ``e_I``."""

    dim: int
    grade: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.float64).reshape(-1)
        if c.shape != (comb(self.dim, self.grade),):
            raise ValueError(
                f"grade-{self.grade} multivector on R^{self.dim} needs "
                f"{comb(self.dim, self.grade)} coefficients, got {c.size}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def is_zero(self) -> bool:
        return bool(np.all(np.abs(self.coeffs) < ZERO_TOL))

    def __neg__(self):
        return type(self)(self.dim, self.grade, -self.coeffs)

    def __mul__(self, s):
        return type(self)(self.dim, self.grade, float(s) * self.coeffs)

    __rmul__ = __mul__

    def __add__(self, other):
        if (self.dim, self.grade) != (other.dim, other.grade):
            raise ValueError("multivector shape mismatch")
        return type(self)(self.dim, self.grade, self.coeffs + other.coeffs)

    def __repr__(self):
        terms = [
            f"{v:+.6g} e{''.join(map(str, I))}"
            for v, I in zip(self.coeffs, multi_indices(self.dim, self.grade))
            if abs(v) >= ZERO_TOL
        ]
        return f"{type(self).__name__}({' '.join(terms) or '0'})"


class Bivector(Multivector):
    """Grade-2 multivector; ``coeffs`` are ``b_ij`` for i < j."""

    def __init__(self, dim, coeffs, grade=2):
        if grade != 2:
            raise ValueError("Bivector has grade 2")
        super().__init__(dim, 2, coeffs)

    def __neg__(self):
        return Bivector(self.dim, -self.coeffs)

    def __mul__(self, s):
        return Bivector(self.dim, float(s) * self.coeffs)

    __rmul__ = __mul__

    def __add__(self, other):
        if self.dim != other.dim:
            raise ValueError("bivector dimension mismatch")
        return Bivector(self.dim, self.coeffs + other.coeffs)

    def matrix(self) -> np.ndarray:
        return bivector_matrix(self.coeffs, self.dim)

    @classmethod
    def from_matrix(cls, B):
        B = np.asarray(B, dtype=np.float64)
        i, j = np.triu_indices(B.shape[0], 1)
        return cls(B.shape[0], B[i, j])


def bivector_matrix(coeffs, m: int) -> np.ndarray:
    """Antisymmetric matrices from pair coefficients; works on stacks."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    i, j = np.triu_indices(m, 1)
    out = np.zeros(coeffs.shape[:-1] + (m, m))
    out[..., i, j] = coeffs
    out[..., j, i] = -coeffs
    return out


def pair_coeffs(matrix) -> np.ndarray:
    """Inverse of :func:`bivector_matrix` (upper-triangle read-out)."""
    matrix = np.asarray(matrix, dtype=np.float64)
    m = matrix.shape[-1]
    i, j = np.triu_indices(m, 1)
    return matrix[..., i, j]


def wedge_vectors(*vectors) -> Multivector:
    """``v1 ^ ... ^ vk``; coefficient on ``e_I`` is the minor ``det V[I, :]``.

    Returns a :class:`Bivector` for two vectors.
    """
    if not vectors:
        raise ValueError("need at least one vector")
    V = np.column_stack([np.asarray(v, dtype=np.float64).reshape(-1) for v in vectors])
    m, k = V.shape
    if any(np.asarray(v).size != m for v in vectors):
        raise ValueError("vectors must share a dimension")
    if k > m:
        return Multivector(m, k, np.zeros(0))
    if k == 2:
        u, v = V[:, 0], V[:, 1]
        return Bivector(m, pair_coeffs(np.outer(u, v) - np.outer(v, u)))
    coeffs = [np.linalg.det(V[list(I), :]) for I in multi_indices(m, k)]
    return Multivector(m, k, coeffs)


def check_antisymmetric(omega, tol=1e-12) -> np.ndarray:
    omega = np.asarray(omega, dtype=np.float64)
    if omega.ndim < 2 or omega.shape[-1] != omega.shape[-2]:
        raise ValueError("expected square matrices")
    scale = max(1.0, float(np.abs(omega).max(initial=0.0)))
    if np.abs(omega + np.swapaxes(omega, -1, -2)).max(initial=0.0) > tol * scale:
        raise ValueError("matrix is not antisymmetric")
    return omega


def pfaffian(omega) -> float:
    omega = check_antisymmetric(omega)
    n = omega.shape[0]
    if n % 2:
        raise ValueError(f"Pfaffian needs even dimension, got {n}")
    if n == 0:
        return 1.0
    return float(kernels.pfaffian_batch(omega[None])[0])


def pfaffian_batch(stack) -> np.ndarray:
    """Pfaffians of an (N, n, n) stack of antisymmetric matrices."""
    stack = check_antisymmetric(stack)
    if stack.shape[-1] % 2:
        raise ValueError("Pfaffian needs even dimension")
    return np.asarray(kernels.pfaffian_batch(np.ascontiguousarray(stack)))


# --- Schubert-variety intersection -----------------------------------------


@dataclass(frozen=True)
class SchubertWitness:
    """``v ^ w = sum(weights * generators)`` with ``v`` in the 2-plane."""

    angle: float
    grid_index: int
    v: np.ndarray
    w: np.ndarray
    weights: np.ndarray
    residual: float


def _wedge_with(v) -> np.ndarray:
    """Matrix of ``w -> v ^ w`` in pair coordinates."""
    m = v.size
    i, j = np.triu_indices(m, 1)
    W = np.zeros((i.size, m))
    rows = np.arange(i.size)
    W[rows, j] += v[i]
    W[rows, i] -= v[j]
    return W


def _witness_at(v, G):
    """Decide ``cone(G) meets {v ^ w} \\ {0}``; G is (n, C(m,2))."""
    W = _wedge_with(v)
    U, s, _ = np.linalg.svd(W, full_matrices=True)
    r = int(np.sum(s > 1e-12 * max(1.0, s[0])))
    U_in, U_perp = U[:, :r], U[:, r:]
    proj_perp = U_perp.T @ G.T
    proj_in = U_in.T @ G.T
    for k in range(r):
        for sgn in (1.0, -1.0):
            A = np.vstack([proj_perp, sgn * proj_in[k : k + 1]])
            b = np.zeros(A.shape[0])
            b[-1] = 1.0
            res = phase_one(A, b)
            if not res.feasible:
                continue
            lam = np.clip(res.x, 0.0, None)
            total = lam.sum()
            if total <= 0:
                continue
            lam = lam / total
            B = G.T @ lam
            if np.linalg.norm(B) <= 1e-12:
                continue
            w, *_ = np.linalg.lstsq(W, B, rcond=None)
            resid = float(np.linalg.norm(W @ w - B))
            if resid <= 1e-9 * max(1.0, np.linalg.norm(B)):
                return lam, w, resid
    return None


def schubert_intersects(
    generators: Sequence[Bivector], tau, resolution: int = 360
) -> Optional[SchubertWitness]:
    """Search for a nonzero element of cone(generators) of the form ``v ^ w``
    with ``v`` in the 2-plane ``tau``.

    ``v`` sweeps ``cos(phi) u1 + sin(phi) u2`` over ``resolution`` angles in
    [0, pi). For each angle the question is an LP, decided exactly up to the
    pivot tolerance. ``None`` only means no witness at this resolution.
    """
    gens = list(generators)
    if not gens:
        raise ValueError("no generators")
    m = gens[0].dim
    if any(g.dim != m or g.grade != 2 for g in gens):
        raise ValueError("generators must be bivectors of one dimension")
    u1, u2 = (np.asarray(u, dtype=np.float64).reshape(-1) for u in tau)
    if u1.size != m or u2.size != m:
        raise ValueError("tau vectors have the wrong dimension")
    if np.linalg.matrix_rank(np.column_stack([u1, u2]), tol=1e-10) < 2:
        raise ValueError("tau is degenerate: its two vectors are dependent")
    if resolution < 1:
        raise ValueError("resolution must be positive")
    G = np.array([g.coeffs for g in gens])
    for n in range(resolution):
        phi = np.pi * n / resolution
        v = np.cos(phi) * u1 + np.sin(phi) * u2
        found = _witness_at(v, G)
        if found is not None:
            lam, w, resid = found
            return SchubertWitness(phi, n, v, w, lam, resid)
    return None
