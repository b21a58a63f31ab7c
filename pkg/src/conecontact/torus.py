"""Flat-torus models, affine torus actions and sample grids."""

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from .multilinear import compound_matrix

TWO_PI = 2.0 * np.pi
MAX_DIM = 6


@dataclass(frozen=True)
class TorusModel:
    """T^dim = (R / 2 pi Z)^dim with Fourier support in the box |f|_inf <= band.

    ``t_axis`` marks the circle factor of S^1 x M; by convention it is 0.
    """

    dim: int
    band: int = 0
    t_axis: Optional[int] = None

    def __post_init__(self):
        if not 1 <= self.dim <= MAX_DIM:
            raise ValueError(f"dim must be in [1, {MAX_DIM}], got {self.dim}")
        if self.band < 0:
            raise ValueError(f"band must be >= 0, got {self.band}")
        if self.t_axis is not None and not 0 <= self.t_axis < self.dim:
            raise ValueError(f"t_axis {self.t_axis} is not a coordinate of T^{self.dim}")

    def with_band(self, band: int) -> "TorusModel":
        return replace(self, band=int(band))

    def compatible(self, other: "TorusModel") -> bool:
        return self.dim == other.dim and self.t_axis == other.t_axis

    def base(self) -> "TorusModel":
        """The factor M of S^1 x M (t coordinate removed)."""
        if self.t_axis is None:
            raise ValueError("model has no t axis")
        return TorusModel(self.dim - 1, self.band, None)

    def extended(self) -> "TorusModel":
        """S^1 x (this model), with the circle as coordinate 0."""
        if self.t_axis is not None:
            raise ValueError("model already has a t axis")
        return TorusModel(self.dim + 1, self.band, 0)


def grid_shape(dim: int, grid: Union[int, Sequence[int]]) -> tuple:
    if np.isscalar(grid):
        shape = (int(grid),) * dim
    else:
        shape = tuple(int(n) for n in grid)
    if len(shape) != dim or any(n < 1 for n in shape):
        raise ValueError(f"grid {grid!r} does not describe a {dim}-dimensional grid")
    return shape


def grid_points(dim: int, grid: Union[int, Sequence[int]]) -> np.ndarray:
    """Uniform grid 2 pi k / n per axis, row-major (last axis fastest)."""
    shape = grid_shape(dim, grid)
    axes = [TWO_PI * np.arange(n) / n for n in shape]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([a.reshape(-1) for a in mesh], axis=1)


def wrap(points) -> np.ndarray:
    """Reduce to [0, 2 pi), snapping values within 1e-12 of 2 pi to 0."""
    p = np.mod(np.asarray(points, dtype=np.float64), TWO_PI)
    p[np.abs(p - TWO_PI) < 1e-12] = 0.0
    return p


def torus_distance(a, b) -> np.ndarray:
    d = np.abs(wrap(np.asarray(a) - np.asarray(b)))
    return np.minimum(d, TWO_PI - d).max(axis=-1)


class PointIndex:
    """Lookup of torus points up to ``tol`` (max-norm, modulo 2 pi)."""

    def __init__(self, points, tol=1e-9):
        self.points = wrap(points)
        self.tol = tol
        self._table = {}
        for n, p in enumerate(self.points):
            self._table.setdefault(self._key(p), n)

    @staticmethod
    def _key(p):
        return tuple(np.round(np.asarray(p) * 1e6).astype(np.int64))

    def find(self, p) -> Optional[int]:
        p = wrap(p)
        n = self._table.get(self._key(p))
        if n is not None and torus_distance(self.points[n], p) <= self.tol:
            return n
        d = torus_distance(self.points, p[None, :])
        n = int(np.argmin(d))
        return n if d[n] <= self.tol else None


@dataclass(frozen=True, eq=False)
class TorusAction:
    """x -> linear @ x + translation (mod 2 pi), carrying a sign of +-1.

    The sign does not change the geometric map; it records whether objects
    are meant to be invariant (+1) or skew-invariant (-1) under it.
    """

    linear: np.ndarray
    translation: np.ndarray
    sign: int = 1
    name: str = field(default="", compare=False)

    def __post_init__(self):
        L = np.asarray(self.linear, dtype=np.float64)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise ValueError("linear part must be square")
        if not np.array_equal(L, np.round(L)):
            raise ValueError("linear part must be an integer matrix")
        if round(abs(np.linalg.det(L))) != 1:
            raise ValueError("linear part must be unimodular (det = +-1)")
        L = np.round(L).astype(np.int64)
        b = np.asarray(self.translation, dtype=np.float64).reshape(-1)
        if b.size != L.shape[0]:
            raise ValueError("translation has the wrong dimension")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        L.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "linear", L)
        object.__setattr__(self, "translation", b)

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    @classmethod
    def identity(cls, dim: int, sign: int = 1) -> "TorusAction":
        return cls(np.eye(dim, dtype=np.int64), np.zeros(dim), sign)

    @classmethod
    def translate(cls, shift, sign: int = 1, name: str = "") -> "TorusAction":
        shift = np.asarray(shift, dtype=np.float64)
        return cls(np.eye(shift.size, dtype=np.int64), shift, sign, name)

    def apply(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return wrap(pts @ self.linear.T + self.translation)

    def compose(self, other: "TorusAction") -> "TorusAction":
        """``self o other`` (apply ``other`` first); signs multiply."""
        return TorusAction(
            self.linear @ other.linear,
            self.linear @ other.translation + self.translation,
            self.sign * other.sign,
        )

    def inverse(self) -> "TorusAction":
        Linv = np.round(np.linalg.inv(self.linear)).astype(np.int64)
        return TorusAction(Linv, -(Linv @ self.translation), self.sign)

    def push_bivectors(self, coeffs) -> np.ndarray:
        """(L ^ L) applied to pair coefficients (no sign)."""
        return np.asarray(coeffs) @ compound_matrix(self.linear, 2).T

    def to_dict(self) -> dict:
        return {
            "linear": self.linear.tolist(),
            "translation": [float(x) for x in self.translation],
            "sign": int(self.sign),
        }

    @classmethod
    def from_dict(cls, d) -> "TorusAction":
        return cls(np.array(d["linear"]), np.array(d["translation"], dtype=float), int(d.get("sign", 1)), d.get("name", ""))

    def __repr__(self):
        return (
            f"TorusAction(linear={self.linear.tolist()}, "
            f"translation={self.translation.tolist()}, sign={self.sign})"
        )
