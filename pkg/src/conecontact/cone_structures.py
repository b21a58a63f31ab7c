"""Sampled cone structures of bivectors on tori."""

from dataclasses import dataclass
from math import comb
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import nnls

from .band_forms import BandForm, FormatError, pair_dirac_many
from .multilinear import Bivector, multi_indices, wedge_vectors
from .torus import PointIndex, TorusAction, TorusModel, grid_points, wrap

__all__ = [
    "AlmostComplexError",
    "ConeSite",
    "EquivarianceReport",
    "GridNotInvariantError",
    "SampledConeStructure",
    "TorusAction",
    "check_equivariance",
    "cone_from_acs",
    "dirac_generators",
    "positivity_margin",
    "probe_vectors",
]

DEFAULT_SEED = 0x5EED
ACS_TOL = 1e-8
MEMBERSHIP_TOL = 1e-9


class AlmostComplexError(ValueError):
    def __init__(self, point, residual):
        super().__init__(f"J^2 + I has size {residual:.3g} at point {np.round(point, 12).tolist()}")
        self.point = point
        self.residual = residual


class GridNotInvariantError(ValueError):
    """An action maps a sample point off the sample grid."""


@dataclass(frozen=True, eq=False)
class ConeSite:
    """Sample point with unit-norm generators, one per row of ``generators``."""

    point: np.ndarray
    generators: np.ndarray

    @property
    def bivectors(self) -> List[Bivector]:
        m = self.point.size
        return [Bivector(m, g) for g in self.generators]


@dataclass(frozen=True, eq=False)
class SampledConeStructure:
    model: TorusModel
    sites: Tuple[ConeSite, ...]

    def __post_init__(self):
        m = self.model.dim
        ncomp = comb(m, 2)
        clean = []
        for site in self.sites:
            if isinstance(site, ConeSite):
                point, gens = site.point, site.generators
            else:
                point, gens = site
            p = wrap(np.asarray(point, dtype=np.float64).reshape(-1))
            if p.size != m:
                raise ValueError(f"site point {p.tolist()} is not in T^{m}")
            G = np.array(
                [g.coeffs if isinstance(g, Bivector) else g for g in gens], dtype=np.float64
            ).reshape(-1, ncomp)
            if not len(G):
                raise ValueError(f"site at {p.tolist()} has no generators")
            norms = np.linalg.norm(G, axis=1)
            bad = (norms < 1e-8) | (norms > 1e8)
            if bad.any():
                raise ValueError(
                    f"generator norm {norms[bad][0]:.3g} at {p.tolist()} is outside [1e-8, 1e8]"
                )
            # rows already unit to rounding are kept so that re-reading is exact
            unit = np.abs(norms - 1.0) <= 4 * np.finfo(float).eps
            G = G / np.where(unit, 1.0, norms)[:, None]
            p.setflags(write=False)
            G.setflags(write=False)
            clean.append(ConeSite(p, G))
        if not clean:
            raise ValueError("cone structure has no sites")
        keys = {tuple(s.point.tolist()) for s in clean}
        if len(keys) != len(clean):
            raise ValueError("cone structure has two sites at the same point")
        object.__setattr__(self, "sites", tuple(clean))

    @property
    def points(self) -> np.ndarray:
        return np.array([s.point for s in self.sites])

    @property
    def n_generators(self) -> int:
        return sum(len(s.generators) for s in self.sites)

    def flat(self) -> Tuple[np.ndarray, np.ndarray]:
        """(points, coeffs) repeated per generator, site-major."""
        pts = np.concatenate([np.repeat(s.point[None], len(s.generators), 0) for s in self.sites])
        gens = np.concatenate([s.generators for s in self.sites])
        return pts, gens

    def to_text(self) -> str:
        pairs = multi_indices(self.model.dim, 2)
        t = "none" if self.model.t_axis is None else str(self.model.t_axis)
        lines = [
            "# conecontact cone structure",
            f"# dim {self.model.dim} band {self.model.band} t_axis {t}",
        ]
        for s in self.sites:
            p = ",".join(format(float(x), ".17g") for x in s.point)
            for g in s.generators:
                body = ";".join(
                    f"{i}<{j}:{format(float(v), '.17g')}" for (i, j), v in zip(pairs, g) if v != 0
                )
                lines.append(f"{p} | {body}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, model: Optional[TorusModel] = None) -> "SampledConeStructure":
        header_model = None
        sites: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                tok = line[1:].split()
                if tok[:1] == ["dim"] and len(tok) == 6:
                    t = None if tok[5] == "none" else int(tok[5])
                    header_model = TorusModel(int(tok[1]), int(tok[3]), t)
                continue
            try:
                p, body = (x.strip() for x in line.split("|"))
                point = tuple(float(x) for x in p.split(","))
                entries = {}
                for item in filter(None, body.split(";")):
                    key, val = item.split(":")
                    i, j = (int(x) for x in key.split("<"))
                    if not 0 <= i < j:
                        raise ValueError(f"bad pair {key}")
                    entries[(i, j)] = float(val)
            except ValueError as exc:
                raise FormatError(f"line {lineno}: cannot parse {raw!r}") from exc
            sites.setdefault(point, []).append(entries)
        model = model or header_model
        if model is None:
            if not sites:
                raise FormatError("empty cone file")
            m = len(next(iter(sites)))
            model = TorusModel(m)
        pos = {I: n for n, I in enumerate(multi_indices(model.dim, 2))}
        built = []
        for point, gens in sites.items():
            G = np.zeros((len(gens), comb(model.dim, 2)))
            for r, entries in enumerate(gens):
                for key, v in entries.items():
                    if key not in pos:
                        raise FormatError(f"pair {key} out of range for T^{model.dim}")
                    G[r, pos[key]] = v
            built.append(ConeSite(np.array(point), G))
        if not built:
            raise FormatError("cone file has no generators")
        try:
            return cls(model, tuple(built))
        except ValueError as exc:
            raise FormatError(str(exc)) from exc


def probe_vectors(dim: int, probes: Union[str, Sequence] = "frame+random", n_random: int = 8,
                  seed: int = DEFAULT_SEED) -> np.ndarray:
    """Probe vectors as rows.

    ``"frame"`` is the standard basis and ``"frame+random"`` appends
    ``n_random`` unit vectors drawn once from ``seed``; the same draw is used
    at every site so symmetric J fields give symmetric cones.
    """
    if isinstance(probes, str):
        frame = np.eye(dim)
        if probes == "frame":
            return frame
        if probes == "frame+random":
            rng = np.random.default_rng(seed)
            R = rng.normal(size=(n_random, dim))
            R /= np.linalg.norm(R, axis=1, keepdims=True)
            return np.vstack([frame, R])
        raise ValueError(f"unknown probe spec {probes!r}")
    V = np.atleast_2d(np.asarray(probes, dtype=np.float64))
    if V.shape[1] != dim:
        raise ValueError(f"probe vectors must have dimension {dim}")
    return V


def cone_from_acs(J: Callable, model: TorusModel, grid=5, probes="frame+random",
                  seed: int = DEFAULT_SEED, points=None) -> SampledConeStructure:
    """Generators ``v ^ J(p) v`` over probes ``v`` at each grid point ``p``.

    ``J`` is ``point -> (m, m)`` matrix; a ``batch(points)`` attribute is
    used when present.
    """
    m = model.dim
    pts = grid_points(m, grid) if points is None else np.atleast_2d(np.asarray(points, float))
    V = probe_vectors(m, probes, seed=seed)
    batch = getattr(J, "batch", None)
    Js = batch(pts) if batch else np.array([J(p) for p in pts])
    if Js.shape != (len(pts), m, m):
        raise ValueError(f"J must return {m}x{m} matrices")
    resid = np.abs(Js @ Js + np.eye(m)).max(axis=(1, 2))
    worst = int(np.argmax(resid))
    if resid[worst] > ACS_TOL:
        raise AlmostComplexError(pts[worst], float(resid[worst]))
    i, j = np.triu_indices(m, 1)
    sites = []
    for p, Jp in zip(pts, Js):
        JV = V @ Jp.T
        G = V[:, i] * JV[:, j] - V[:, j] * JV[:, i]
        sites.append(ConeSite(p, G))
    return SampledConeStructure(model, tuple(sites))


def positivity_margin(form: BandForm, cone: SampledConeStructure) -> float:
    if form.degree != 2:
        raise ValueError("positivity_margin needs a 2-form")
    if not form.model.compatible(cone.model):
        raise ValueError(f"model mismatch: {form.model} vs {cone.model}")
    pts, gens = cone.flat()
    return float(pair_dirac_many(form, pts, gens).min())


@dataclass(frozen=True)
class EquivarianceReport:
    max_violation: float
    worst_site: int
    worst_generator: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol


def _hull_distance(target, H, tol):
    """Distance from ``target`` to cone(rows of H); exact matches short-cut."""
    if np.abs(H - target).max(axis=1).min() <= tol:
        return float(np.abs(H - target).max(axis=1).min())
    _, rnorm = nnls(H.T, target)
    return float(rnorm)


def check_equivariance(cone: SampledConeStructure, action: TorusAction,
                       tol: float = MEMBERSHIP_TOL) -> EquivarianceReport:
    """Is ``sign (L ^ L) g`` in the cone at ``phi(p)`` for every site ``(p, g)``?"""
    if action.dim != cone.model.dim:
        raise ValueError("action dimension does not match the cone")
    pts = cone.points
    index = PointIndex(pts)
    images = action.apply(pts)
    worst = (0.0, -1, -1)
    # signed permutations push unit bivectors to unit bivectors exactly
    L = np.abs(action.linear)
    exact_push = bool(((L.sum(0) == 1) & (L.sum(1) == 1)).all())
    for s, (site, q) in enumerate(zip(cone.sites, images)):
        target_site = index.find(q)
        if target_site is None:
            raise GridNotInvariantError(
                f"action maps {site.point.tolist()} to {q.tolist()}, which is not a sample point"
            )
        H = cone.sites[target_site].generators
        pushed = action.sign * action.push_bivectors(site.generators)
        if not exact_push:
            pushed /= np.linalg.norm(pushed, axis=1, keepdims=True)
        for k, g in enumerate(pushed):
            v = _hull_distance(g, H, tol)
            if v > worst[0]:
                worst = (v, s, k)
    return EquivarianceReport(worst[0], worst[1], worst[2], tol)


def dirac_generators(cone: SampledConeStructure) -> List[Tuple[np.ndarray, Bivector]]:
    m = cone.model.dim
    return [(s.point, Bivector(m, g)) for s in cone.sites for g in s.generators]


def standard_acs(dim: int) -> np.ndarray:
    """Block-diagonal ``J e_(2i) = e_(2i+1)``, ``J e_(2i+1) = -e_(2i)``."""
    if dim % 2:
        raise ValueError("standard J needs even dimension")
    J = np.zeros((dim, dim))
    for i in range(0, dim, 2):
        J[i + 1, i] = 1.0
        J[i, i + 1] = -1.0
    return J


def constant_acs(J) -> Callable:
    J = np.asarray(J, dtype=np.float64)
    return lambda p: J
