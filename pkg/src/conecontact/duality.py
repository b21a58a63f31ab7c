"""Separation of Dirac generators by D_theta-closed 2-forms, with certificates.

The LP variables are coordinates in a basis ``Z`` of the closed (and, when
requested, symmetric and t-independent) forms, so the Farkas ray of an
infeasible problem annihilates ``ker D_theta`` by construction. In finite
dimensions the annihilator of a kernel is the image of the transpose, so the
ray is an exact structure current.
"""

import hashlib
import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space

from .band_forms import (
    BandForm,
    ConstantOneForm,
    RealLayout,
    lichnerowicz_d,
    pair_dirac_many,
    pullback_affine,
    pullback_band,
)
from .cone_structures import SampledConeStructure, check_equivariance
from .lp import lp_feasibility
from .multilinear import Bivector, left_wedge_matrices
from .torus import TorusAction, TorusModel

ZERO_ROW_TOL = 1e-12
CLOSURE_TOL = 1e-10
SYMMETRY_TOL = 1e-10
EXACT_TOL = 1e-8
NULL_RTOL = 1e-10


class VerificationError(RuntimeError):
    """A certificate produced by the solver failed independent verification."""

    def __init__(self, report):
        super().__init__(f"certificate failed verification: {report.worst}")
        self.report = report


@dataclass(frozen=True, eq=False)
class SeparationProblem:
    model: TorusModel
    theta: ConstantOneForm
    band: int
    points: np.ndarray
    generators: np.ndarray
    symmetries: Tuple[TorusAction, ...] = ()
    invariant_sector: bool = False
    provenance: Dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        gens = np.atleast_2d(np.asarray(self.generators, dtype=np.float64))
        m = self.model.dim
        if gens.size == 0 or len(gens) == 0:
            raise ValueError("separation problem needs at least one generator")
        if pts.shape != (len(gens), m) or gens.shape[1] != m * (m - 1) // 2:
            raise ValueError(f"points/generators shapes {pts.shape}, {gens.shape} do not match T^{m}")
        if not self.theta.model.compatible(self.model):
            raise ValueError("theta lives on a different model")
        if self.invariant_sector and self.model.t_axis is None:
            raise ValueError("invariant sector needs a t axis")
        for s in self.symmetries:
            if s.dim != m:
                raise ValueError("symmetry dimension does not match the model")
        pts.setflags(write=False)
        gens.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "symmetries", tuple(self.symmetries))
        object.__setattr__(self, "model", self.model.with_band(self.band))

    @classmethod
    def from_generators(cls, model, theta, band, generators: Sequence[Tuple[np.ndarray, Bivector]],
                        **kw):
        gens = list(generators)
        if not gens:
            raise ValueError("separation problem needs at least one generator")
        pts = np.array([np.asarray(p, dtype=np.float64) for p, _ in gens])
        coeffs = np.array([g.coeffs if isinstance(g, Bivector) else g for _, g in gens])
        return cls(model, theta, band, pts, coeffs, **kw)

    @classmethod
    def from_cone(cls, cone: SampledConeStructure, theta, band, symmetries=(),
                  invariant_sector=False, check_tol=1e-9, provenance=None):
        """Problem over a cone's Dirac generators; each symmetry is checked."""
        for s in symmetries:
            report = check_equivariance(cone, s, check_tol)
            if not report.passed:
                raise ValueError(
                    f"cone is not equivariant under {s!r}: violation {report.max_violation:.3g}"
                )
        pts, gens = cone.flat()
        return cls(cone.model, theta, band, pts, gens, tuple(symmetries), invariant_sector,
                   dict(provenance or {}))

    def scaled(self, factors) -> "SeparationProblem":
        f = np.asarray(factors, dtype=np.float64).reshape(-1, 1)
        return SeparationProblem(self.model, self.theta, self.band, self.points,
                                 self.generators * f, self.symmetries, self.invariant_sector,
                                 self.provenance)

    def key(self):
        return _basis_key(self.model, self.theta, 2, self.band, self.invariant_sector, self.symmetries)


@dataclass(frozen=True, eq=False)
class PositiveForm:
    omega: BandForm
    margin: float
    variant = "PositiveForm"


@dataclass(frozen=True, eq=False)
class ExactCurrent:
    weights: np.ndarray
    closure_residual: float
    variant = "ExactCurrent"


@dataclass(frozen=True, eq=False)
class NotSalient:
    zero_rows: Tuple[int, ...]
    variant = "NotSalient"


Certificate = (PositiveForm, ExactCurrent, NotSalient)


@dataclass(frozen=True)
class VerificationReport:
    variant: str
    passed: bool
    residuals: Dict[str, float]
    worst: Dict[str, object]


# -- closed subspace ------------------------------------------------------


def _basis_key(model, theta, degree, band, invariant_sector, symmetries):
    sym = tuple(
        (tuple(s.linear.ravel().tolist()), tuple(s.translation.tolist()), s.sign) for s in symmetries
    )
    return (model.dim, model.t_axis, tuple(theta.components), degree, band, bool(invariant_sector), sym)


def _block_operator(f, theta, degree):
    """Complex matrix of D_theta at frequency f on degree-k coefficients."""
    E = left_wedge_matrices(len(f), degree)
    return np.tensordot(1j * np.asarray(f, float) + theta, E, axes=(0, 0))


def _realify(K):
    return np.block([[K.real, -K.imag], [K.imag, K.real]])


def _kernel_blockwise(layout, theta, degree):
    """Orthonormal ker D_theta in layout coordinates, one frequency at a time."""
    cols = []
    m = layout.model.dim
    if degree >= m:
        return np.eye(layout.size)
    for n, f in enumerate(layout.freqs):
        K = _block_operator(f, theta, degree)
        sl = layout.block(n)
        if not f.any():
            N = null_space(K.real, rcond=NULL_RTOL)
        else:
            N = null_space(_realify(K), rcond=NULL_RTOL)
        if N.shape[1]:
            Z = np.zeros((layout.size, N.shape[1]))
            Z[sl] = N
            cols.append(Z)
    return np.hstack(cols) if cols else np.zeros((layout.size, 0))


def _kernel_assembled(layout, theta, degree):
    """Same space as :func:`_kernel_blockwise` via one global SVD.

    The operator is assembled on the full coordinate vector, columns are
    visited in reversed frequency order, and the null space is taken in one
    shot, so no per-block orthogonalisation is shared with the solver path.
    """
    m = layout.model.dim
    if degree >= m:
        return np.eye(layout.size)
    target = RealLayout(layout.model, degree + 1, layout.band, layout.t_sector)
    D = np.zeros((target.size, layout.size))
    for n in reversed(range(len(layout.freqs))):
        f = layout.freqs[n]
        K = _block_operator(f, theta, degree)
        src, dst = layout.block(n), target.block(n)
        D[dst, src] = K.real if not f.any() else _realify(K)
    perm = np.arange(layout.size)[::-1]
    N = null_space(D[:, perm], rcond=NULL_RTOL)
    out = np.zeros_like(N)
    out[perm] = N
    return out


def _symmetry_matrix(layout, action, Z):
    """Coordinates of ``phi^* form(z)`` for each column z of Z."""
    if pullback_band(action.linear, layout.band) > layout.band:
        raise ValueError(f"symmetry {action!r} does not preserve the band")
    out = np.zeros_like(Z)
    for c in range(Z.shape[1]):
        out[:, c] = layout.to_vector(pullback_affine(layout.to_form(Z[:, c]), action))
    return out


def _restrict_to_symmetries(layout, Z, symmetries):
    if not symmetries or Z.shape[1] == 0:
        return Z
    rows = [_symmetry_matrix(layout, s, Z) - s.sign * Z for s in symmetries]
    C = null_space(np.vstack(rows), rcond=NULL_RTOL)
    Q, _ = np.linalg.qr(Z @ C)
    return Q


@lru_cache(maxsize=64)
def _closed_basis_cached(key, fresh):
    dim, t_axis, theta, degree, band, sector, sym = key
    model = TorusModel(dim, band, t_axis)
    layout = RealLayout(model, degree, band, sector)
    th = np.array(theta)
    Z = _kernel_assembled(layout, th, degree) if fresh else _kernel_blockwise(layout, th, degree)
    actions = [TorusAction(np.array(L).reshape(dim, dim), np.array(b), s) for L, b, s in sym]
    Z = _restrict_to_symmetries(layout, Z, actions)
    Z.setflags(write=False)
    return layout, Z


def closed_basis_matrix(model, theta, degree, band, invariant_sector=False, symmetries=(),
                        fresh=False):
    """(layout, Z): columns of Z span the requested closed subspace."""
    key = _basis_key(model, theta, degree, band, invariant_sector, symmetries)
    return _closed_basis_cached(key, bool(fresh))


def closed_subspace_basis(model, theta, degree, band, invariant_sector=False,
                          symmetries=()) -> List[BandForm]:
    layout, Z = closed_basis_matrix(model, theta, degree, band, invariant_sector, symmetries)
    return [layout.to_form(Z[:, c]) for c in range(Z.shape[1])]


def evaluation_matrix(problem: SeparationProblem, fresh=False) -> np.ndarray:
    """``M[j, b] = Z_b(point_j)(P_j)``."""
    layout, Z = closed_basis_matrix(problem.model, problem.theta, 2, problem.band,
                                    problem.invariant_sector, problem.symmetries, fresh)
    return layout.evaluation_rows(problem.points, problem.generators) @ Z


# -- separation -----------------------------------------------------------


def separate(problem: SeparationProblem, max_iter: Optional[int] = None, verify: bool = True,
             regularize: bool = True):
    """PositiveForm, ExactCurrent or NotSalient for ``problem``.

    A PositiveForm uses the l1-smallest coefficient vector in the closed
    basis unless ``regularize`` is off, in which case it is an arbitrary LP
    vertex. Arbitrary vertices can be positive on the sampled generators
    while degenerate between probes.

    Raises :class:`~conecontact.lp.IterationLimitError` if the simplex runs
    out of pivots and :class:`VerificationError` if the result fails
    :func:`verify_certificate`.
    """
    layout, Z = closed_basis_matrix(problem.model, problem.theta, 2, problem.band,
                                    problem.invariant_sector, problem.symmetries)
    M = layout.evaluation_rows(problem.points, problem.generators) @ Z
    zero = np.flatnonzero(np.abs(M).max(axis=1, initial=0.0) < ZERO_ROW_TOL)
    if len(zero):
        cert = NotSalient(tuple(int(j) for j in zero))
    else:
        res = lp_feasibility(M, max_iter=max_iter, regularize=regularize)
        if res.feasible:
            omega = layout.to_form(Z @ res.y)
            cert = PositiveForm(omega, float((M @ res.y).min()))
        else:
            cert = ExactCurrent(res.lam, float(np.abs(res.lam @ M).max()))
    if verify:
        report = verify_certificate(cert, problem)
        if not report.passed:
            raise VerificationError(report)
    return cert


def verify_certificate(cert, problem: SeparationProblem, closure_tol=CLOSURE_TOL,
                       symmetry_tol=SYMMETRY_TOL, exact_tol=EXACT_TOL) -> VerificationReport:
    """Independent re-check; never raises on a bad certificate."""
    res: Dict[str, float] = {}
    worst: Dict[str, object] = {}
    ok = True
    if isinstance(cert, PositiveForm):
        omega = cert.omega
        if omega.degree != 2 or not omega.model.compatible(problem.model):
            return VerificationReport(cert.variant, False, {}, {"shape": "omega does not fit the problem"})
        scale = max(1.0, omega.max_abs())
        res["band_excess"] = float(max(0, omega.actual_band - problem.band))
        ok &= res["band_excess"] == 0
        if omega.degree < omega.dim:
            res["closure"] = lichnerowicz_d(problem.theta, omega).max_abs() / scale
        else:  # top degree: D_theta lands in the zero space
            res["closure"] = 0.0
        if res["closure"] > closure_tol:
            ok = False
            worst["closure"] = res["closure"]
        pair = pair_dirac_many(omega, problem.points, problem.generators)
        j = int(np.argmin(pair))
        res["min_pairing"] = float(pair[j])
        res["margin_shortfall"] = float(max(0.0, cert.margin - pair[j]))
        if not (pair[j] > 0 and cert.margin > 0 and pair[j] >= cert.margin * (1 - 1e-9)):
            ok = False
            worst["generator"] = j
        if problem.invariant_sector:
            t = problem.model.t_axis
            moving = omega.freqs[:, t] != 0
            res["t_dependence"] = float(np.abs(omega.coeffs[moving]).max(initial=0.0)) / scale
            if res["t_dependence"] > symmetry_tol:
                ok = False
                worst["t_dependence"] = res["t_dependence"]
        sym = 0.0
        for n, s in enumerate(problem.symmetries):
            r = (pullback_affine(omega, s) - s.sign * omega).max_abs() / scale
            if r > sym:
                sym = r
                if r > symmetry_tol:
                    worst["symmetry"] = n
        res["symmetry"] = sym
        ok &= sym <= symmetry_tol
    elif isinstance(cert, ExactCurrent):
        lam = np.asarray(cert.weights, dtype=np.float64)
        if lam.shape != (len(problem.generators),):
            return VerificationReport(cert.variant, False, {}, {"shape": "weights do not match generators"})
        res["negativity"] = float(max(0.0, -lam.min()))
        res["sum_error"] = float(abs(lam.sum() - 1.0))
        M = evaluation_matrix(problem, fresh=True)
        r = np.abs(lam @ M) if M.shape[1] else np.zeros(1)
        res["closure"] = float(r.max(initial=0.0))
        if res["closure"] > exact_tol:
            ok = False
            worst["kernel_direction"] = int(np.argmax(r))
        if res["negativity"] > 1e-12 or res["sum_error"] > 1e-9:
            ok = False
            worst["weights"] = "not a probability vector"
    elif isinstance(cert, NotSalient):
        M = evaluation_matrix(problem, fresh=True)
        rows = list(cert.zero_rows)
        bad = [j for j in rows if not 0 <= j < len(M)]
        r = float(np.abs(M[[j for j in rows if j not in bad]]).max(initial=0.0)) if M.size else 0.0
        res["row_size"] = r
        if bad or not rows or r > ZERO_ROW_TOL * 10:
            ok = False
            worst["rows"] = bad or rows
    else:
        return VerificationReport(type(cert).__name__, False, {}, {"type": "unknown certificate"})
    return VerificationReport(cert.variant, bool(ok), res, worst)


def convex_combination(a: PositiveForm, b: PositiveForm, s: float, problem) -> PositiveForm:
    """``(1 - s) a + s b`` with its recomputed margin."""
    omega = (1.0 - s) * a.omega + s * b.omega
    margin = float(pair_dirac_many(omega, problem.points, problem.generators).min())
    return PositiveForm(omega, margin)


# -- JSON -----------------------------------------------------------------


def _emit(obj, indent=0) -> str:
    """Deterministic JSON with 17-significant-digit floats."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(obj[k], indent + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(x, (dict, list, tuple)) for x in obj):
            return "[" + ", ".join(_emit(x) for x in obj) + "]"
        return "[\n" + ",\n".join(pad + _emit(x, indent + 1) for x in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not np.isfinite(x):
            raise ValueError("non-finite number in certificate")
        s = format(x, ".17g")
        return s if any(c in s for c in ".en") else s + ".0"
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def certificate_document(cert, problem: SeparationProblem, report: VerificationReport) -> Dict:
    m = problem.model
    if isinstance(cert, PositiveForm):
        payload = {"margin": cert.margin, "omega": cert.omega.to_text()}
    elif isinstance(cert, ExactCurrent):
        payload = {"weights": [float(x) for x in cert.weights], "closure_residual": cert.closure_residual}
    else:
        payload = {"zero_rows": list(cert.zero_rows)}
    return {
        "variant": cert.variant,
        "model": {"dim": m.dim, "t_axis": m.t_axis, "invariant_sector": problem.invariant_sector},
        "theta": list(problem.theta.components),
        "band": problem.band,
        "symmetries": [s.to_dict() for s in problem.symmetries],
        "payload": payload,
        "residuals": dict(report.residuals, passed=report.passed),
        "grid_provenance": dict(problem.provenance),
    }


def certificate_to_json(cert, problem, report) -> str:
    return _emit(certificate_document(cert, problem, report)) + "\n"


def certificate_from_document(doc: Dict):
    """(certificate, model, theta, band, symmetries, invariant_sector)."""
    m = doc["model"]
    model = TorusModel(int(m["dim"]), int(doc["band"]), m["t_axis"])
    theta = ConstantOneForm(model, tuple(doc["theta"]))
    syms = tuple(TorusAction.from_dict(s) for s in doc["symmetries"])
    p = doc["payload"]
    variant = doc["variant"]
    if variant == "PositiveForm":
        cert = PositiveForm(BandForm.from_text(p["omega"]), float(p["margin"]))
    elif variant == "ExactCurrent":
        cert = ExactCurrent(np.array(p["weights"], dtype=np.float64), float(p["closure_residual"]))
    elif variant == "NotSalient":
        cert = NotSalient(tuple(int(j) for j in p["zero_rows"]))
    else:
        raise ValueError(f"unknown certificate variant {variant!r}")
    return cert, model, theta, int(doc["band"]), syms, bool(m.get("invariant_sector", False))


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
