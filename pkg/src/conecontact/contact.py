"""Contact forms on tori, the twisted symplectization and compatible ACS.

The circle factor of ``S^1 x M`` is coordinate 0. For a 1-form ``alpha``
on ``M``, ``symp(alpha) = dt ^ pi*alpha + d(pi*alpha) = D_dt(pi*alpha)``.
"""

from dataclasses import dataclass
from math import comb
from typing import Callable, Optional, Sequence

import numpy as np

from .band_forms import (
    BandForm,
    ConstantOneForm,
    exterior_d,
    integrate_top,
    lichnerowicz_d,
    wedge,
)
from .multilinear import bivector_matrix, multi_index_position, multi_indices, pfaffian_batch
from .torus import PointIndex, TorusAction, TorusModel, grid_points

REEB_TOL = 1e-9
DEGENERACY_TOL = 1e-10


class NotContactError(ValueError):
    """alpha is degenerate where a contact condition was required."""


@dataclass(frozen=True)
class ContactCandidate:
    """A 1-form on an odd-dimensional torus T^(2n+1) without a t axis."""

    alpha: BandForm

    def __post_init__(self):
        a = self.alpha
        if not isinstance(a, BandForm) or a.degree != 1:
            raise ValueError("contact candidate must be a 1-form")
        if a.dim % 2 == 0:
            raise ValueError(f"contact forms live in odd dimension, got T^{a.dim}")
        if a.model.t_axis is not None:
            raise ValueError("contact candidate must live on M (no t axis)")

    @property
    def n(self) -> int:
        return (self.alpha.dim - 1) // 2

    @property
    def model(self) -> TorusModel:
        return self.alpha.model


@dataclass(frozen=True)
class MetricField:
    """Symmetric positive-definite matrix field on a torus.

    Either ``constant`` is given or ``func(point) -> matrix``.
    """

    dim: int
    constant: Optional[np.ndarray] = None
    func: Optional[Callable] = None

    def __post_init__(self):
        if (self.constant is None) == (self.func is None):
            raise ValueError("give exactly one of constant / func")
        if self.constant is not None:
            G = np.array(self.constant, dtype=np.float64)
            _check_spd(G, self.dim)
            G.setflags(write=False)
            object.__setattr__(self, "constant", G)

    @classmethod
    def identity(cls, dim):
        return cls(dim, constant=np.eye(dim))

    def at(self, point) -> np.ndarray:
        if self.constant is not None:
            return self.constant
        G = np.asarray(self.func(np.asarray(point, dtype=np.float64)), dtype=np.float64)
        _check_spd(G, self.dim)
        return G


def _check_spd(G, dim):
    if G.shape != (dim, dim):
        raise ValueError(f"metric must be {dim}x{dim}, got {G.shape}")
    if np.abs(G - G.T).max() > 1e-12 * max(1.0, np.abs(G).max()):
        raise ValueError("metric is not symmetric")
    if np.linalg.eigvalsh(G).min() < 1e-8:
        raise ValueError("metric is not positive definite")


def average_metric(g: MetricField, actions: Sequence[TorusAction]) -> MetricField:
    """``g'(p) = mean over the group of L^T g(phi(p)) L``.

    ``actions`` must list every element of a finite group (identity included).
    """
    acts = list(actions)
    if not acts:
        raise ValueError("need at least the identity")

    def func(p):
        return sum(a.linear.T @ g.at(a.apply(p[None, :])[0]) @ a.linear for a in acts) / len(acts)

    return MetricField(g.dim, func=func)


# -- forms ----------------------------------------------------------------


def pi_pullback(a: BandForm) -> BandForm:
    """Pull back along S^1 x M -> M; the new t coordinate is axis 0."""
    m, k = a.dim, a.degree
    model = a.model.extended()
    freqs = np.hstack([np.zeros((len(a.freqs), 1), np.int64), a.freqs])
    pos = multi_index_position(m + 1, k)
    cols = [pos[tuple(i + 1 for i in I)] for I in multi_indices(m, k)]
    coeffs = np.zeros((len(a.freqs), comb(m + 1, k)), np.complex128)
    coeffs[:, cols] = a.coeffs
    return BandForm(model, k, freqs, coeffs)


def volume_form(cand: ContactCandidate) -> BandForm:
    """``alpha ^ (d alpha)^n``."""
    alpha = cand.alpha
    da = exterior_d(alpha) if alpha.dim > 1 else None
    out = alpha
    for _ in range(cand.n):
        out = wedge(out, da)
    return out


@dataclass(frozen=True)
class ContactReport:
    min_abs_density: float
    integral: float
    points: np.ndarray
    densities: np.ndarray

    def is_contact(self, tol: float) -> bool:
        return self.min_abs_density > tol


def verify_contact(cand: ContactCandidate, grid=17) -> ContactReport:
    """Density of ``alpha ^ (d alpha)^n`` on ``e_1 ^ ... ^ e_m`` over a grid."""
    vol = volume_form(cand)
    pts = grid_points(cand.alpha.dim, grid)
    dens = vol.evaluate(pts)[:, 0]
    return ContactReport(float(np.abs(dens).min()), integrate_top(vol), pts, dens)


def twisted_symplectization(cand: ContactCandidate) -> BandForm:
    alpha = cand.alpha if isinstance(cand, ContactCandidate) else cand
    lifted = pi_pullback(alpha)
    return lichnerowicz_d(ConstantOneForm.dt(lifted.model), lifted)


@dataclass(frozen=True)
class Extraction:
    alpha0: BandForm
    beta0: Optional[BandForm]
    residual: float
    tol: float

    @property
    def accepted(self) -> bool:
        return self.residual <= self.tol


def extract_contact(beta: BandForm, tol: float = 1e-12) -> Extraction:
    """Split ``beta = pi*beta0 + dt ^ pi*alpha0``; residual is |beta0 - d alpha0|."""
    if beta.degree != 2:
        raise ValueError("extract_contact needs a 2-form")
    if beta.model.t_axis != 0:
        raise ValueError("extract_contact needs a model whose t axis is coordinate 0")
    if not beta.is_t_independent():
        worst = np.abs(beta.coeffs[beta.freqs[:, 0] != 0]).max()
        raise ValueError(f"beta depends on t (largest t-moving coefficient {worst:.3g})")
    m = beta.dim - 1
    base = TorusModel(m, beta.band, None)
    pos = multi_index_position(m + 1, 2)
    a_cols = [pos[(0, j + 1)] for j in range(m)]
    b_cols = [pos[(i + 1, j + 1)] for i, j in multi_indices(m, 2)]
    freqs = beta.freqs[:, 1:]
    alpha0 = BandForm._from_half(base, 1, freqs, beta.coeffs[:, a_cols])
    if m < 2:
        # no 2-forms on a circle base: beta0 = 0 and d alpha0 = 0
        return Extraction(alpha0, None, 0.0, tol)
    beta0 = BandForm._from_half(base, 2, freqs, beta.coeffs[:, b_cols])
    residual = (beta0 - exterior_d(alpha0)).max_abs()
    return Extraction(alpha0, beta0, float(residual), tol)


# -- pointwise linear algebra ---------------------------------------------


def reeb_vector(alpha_p, dalpha_p) -> np.ndarray:
    """Solve ``[d alpha; alpha] R = [0; 1]`` by least squares and certify it."""
    a = np.asarray(alpha_p, dtype=np.float64).reshape(-1)
    W = np.asarray(dalpha_p, dtype=np.float64)
    m = a.size
    A = np.vstack([W, a[None, :]])
    rhs = np.zeros(m + 1)
    rhs[-1] = 1.0
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= DEGENERACY_TOL * max(1.0, s[0]):
        raise NotContactError(f"Reeb system is singular (smallest singular value {s[-1]:.3g})")
    R, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    resid = float(np.abs(A @ R - rhs).max())
    if resid > REEB_TOL:
        raise NotContactError(f"Reeb system residual {resid:.3g} exceeds {REEB_TOL}")
    return R


def _base_point(cand, point):
    p = np.asarray(point, dtype=np.float64).reshape(-1)
    m = cand.alpha.dim
    if p.size == m + 1:
        return p[1:]
    if p.size != m:
        raise ValueError(f"point must have {m} or {m + 1} coordinates")
    return p


def _alpha_data(cand, base_points):
    alpha = cand.alpha
    a = alpha.evaluate(base_points)
    if alpha.dim > 1:
        W = bivector_matrix(exterior_d(alpha).evaluate(base_points), alpha.dim)
    else:
        W = np.zeros((len(a), 1, 1))
    return a, W


def reeb_at(cand: ContactCandidate, point) -> np.ndarray:
    p = _base_point(cand, point)
    a, W = _alpha_data(cand, p[None, :])
    return reeb_vector(a[0], W[0])


def compatible_acs_polar(omega, g) -> np.ndarray:
    """ACS tamed by ``omega`` from the polar part of ``A = omega^-1 g``.

    ``A`` satisfies ``g(X, Y) = omega(X, A Y)`` and ``J = A (-A^2)^(-1/2)``.
    In g-orthonormal coordinates ``x' = g^(1/2) x`` this ``J'`` is the
    orthogonal polar factor of ``omega'^-1``, i.e. ``-polar(omega')``, read
    off one SVD. Forming ``A^2`` instead squares the conditioning.
    """
    W = np.asarray(omega, dtype=np.float64)
    G = np.asarray(g, dtype=np.float64)
    n = W.shape[0]
    if W.shape != (n, n) or G.shape != (n, n):
        raise ValueError("omega and g must be square of equal size")
    if n == 0:
        return np.zeros((0, 0))
    if np.abs(W + W.T).max() > 1e-12 * max(1.0, np.abs(W).max()):
        raise ValueError("omega is not antisymmetric")
    if n % 2 or abs(float(pfaffian_batch(W[None])[0])) < DEGENERACY_TOL:
        raise NotContactError("omega is singular")
    if np.abs(G - G.T).max() > 1e-12 * max(1.0, np.abs(G).max()):
        raise ValueError("g is not symmetric")
    gw, gv = np.linalg.eigh(G)
    if gw.min() <= 0:
        raise ValueError("g is not positive definite")
    root = (gv * np.sqrt(gw)) @ gv.T
    iroot = (gv / np.sqrt(gw)) @ gv.T
    U, s, Vt = np.linalg.svd(iroot @ W @ iroot)
    if s.min() <= 0:
        raise NotContactError("omega is numerically degenerate")
    return iroot @ (-(U @ Vt)) @ root


def _xi_basis(a):
    """Orthonormal basis of ker(a) as columns."""
    _, _, Vt = np.linalg.svd(a[None, :])
    return Vt[1:].T


def compatible_acs_reeb(cand: ContactCandidate, g: MetricField, point) -> np.ndarray:
    """J on T(S^1 x M) at ``point``: J(dt) = R, J(R) = -dt, polar J on xi.

    ``point`` may include the t coordinate; it is ignored.
    """
    p = _base_point(cand, point)
    a, W = _alpha_data(cand, p[None, :])
    return _acs_reeb_from_data(a[0], W[0], g.at(p))


def _acs_reeb_from_data(a, W, G):
    m = a.size
    R = reeb_vector(a, W)
    E = _xi_basis(a)
    Jxi = compatible_acs_polar(E.T @ W @ E, E.T @ G @ E) if m > 1 else np.zeros((0, 0))
    dt = np.zeros(m + 1)
    dt[0] = 1.0
    Rt = np.concatenate([[0.0], R])
    Et = np.vstack([np.zeros((1, m - 1)), E])
    B_in = np.column_stack([dt, Rt, Et])
    B_out = np.column_stack([Rt, -dt, Et @ Jxi])
    return np.linalg.solve(B_in.T, B_out.T).T


class ReebACSField:
    """``point -> compatible_acs_reeb(cand, g, point)`` with a batched form."""

    def __init__(self, cand: ContactCandidate, g: Optional[MetricField] = None):
        self.cand = cand
        self.g = g if g is not None else MetricField.identity(cand.alpha.dim)
        self.dim = cand.alpha.dim + 1

    def __call__(self, point) -> np.ndarray:
        return compatible_acs_reeb(self.cand, self.g, point)

    def batch(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        base = pts[:, 1:]
        a, W = _alpha_data(self.cand, base)
        return np.array([_acs_reeb_from_data(a[i], W[i], self.g.at(base[i])) for i in range(len(pts))])


def skew_acs_check(J_field, action: TorusAction, points, tol: float = 1e-9) -> float:
    """Max over ``points`` of ``|L^-1 J(phi(p)) L - sign J(p)|_max``.

    For sign -1 this measures skew-invariance; for sign +1, invariance.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    images = action.apply(pts)
    index = PointIndex(pts)
    missing = [i for i, q in enumerate(images) if index.find(q) is None]
    if missing:
        raise ValueError(f"grid is not invariant under the action (point {pts[missing[0]].tolist()})")
    batch = getattr(J_field, "batch", None)
    Jp = batch(pts) if batch else np.array([J_field(p) for p in pts])
    Jq = batch(images) if batch else np.array([J_field(q) for q in images])
    L = action.linear.astype(np.float64)
    Linv = np.linalg.inv(L)
    resid = np.abs(Linv @ Jq @ L - action.sign * Jp).max(axis=(1, 2))
    return float(resid.max(initial=0.0))


def symplectization_pfaffians(beta: BandForm, points) -> np.ndarray:
    return pfaffian_batch(beta.matrices(points))


# -- presets --------------------------------------------------------------


def alpha_std(band: int = 1) -> BandForm:
    """``cos z dx + sin z dy`` on T^3 with coordinates (x, y, z)."""
    model = TorusModel(3, max(1, band))
    return BandForm.from_terms(model, 1, [(1.0, "cos", (0, 0, 1), (0,)), (1.0, "sin", (0, 0, 1), (1,))])


def preset_form(name: str, band: Optional[int] = None) -> BandForm:
    if name == "alpha_std":
        return alpha_std(1 if band is None else band)
    if name == "dx":
        return BandForm.constant(TorusModel(1, band or 0), 1, {(0,): 1.0})
    if name == "dz":
        return BandForm.constant(TorusModel(3, band or 0), 1, {(2,): 1.0})
    raise KeyError(f"unknown preset form {name!r}; known: alpha_std, dx, dz")


def z_shift_pi(dim_with_t: int = 4) -> TorusAction:
    """``z -> z + pi`` on the last coordinate, skew sign."""
    shift = np.zeros(dim_with_t)
    shift[-1] = np.pi
    return TorusAction.translate(shift, sign=-1, name="z+pi")
