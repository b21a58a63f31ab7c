"""Band-limited real differential forms on flat tori.

A degree-k form is ``sum_f sum_I c[f, I] exp(i f.x) dx^I`` with integer
frequencies in the box ``|f|_inf <= band``. Reality makes ``c[-f] =
conj(c[f])``, so only the half-space ``H`` (``f = 0`` or first nonzero
component positive) is stored; the conjugate half is synthesised on demand.
``d`` and ``D_theta = d + theta ^`` for constant ``theta`` act frequency by
frequency, which keeps them exact on the truncated space.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from .multilinear import (
    Multivector,
    compound_matrix,
    left_wedge_matrices,
    multi_index_position,
    multi_indices,
    wedge_table,
)
from .torus import TWO_PI, TorusAction, TorusModel

REALITY_TOL = 1e-12


def in_half_space(freqs) -> np.ndarray:
    """Mask of rows that are zero or whose first nonzero entry is positive."""
    freqs = np.atleast_2d(np.asarray(freqs))
    nz = freqs != 0
    has = nz.any(axis=1)
    first = np.argmax(nz, axis=1)
    lead = freqs[np.arange(len(freqs)), first]
    return ~has | (lead > 0)


@lru_cache(maxsize=None)
def half_space_box(dim: int, band: int, zero_axis: Optional[int] = None) -> np.ndarray:
    """All half-space frequencies with ``|f|_inf <= band``, sorted; f = 0 first."""
    axes = [np.arange(-band, band + 1)] * dim
    if zero_axis is not None:
        axes[zero_axis] = np.zeros(1, dtype=np.int64)
    mesh = np.meshgrid(*axes, indexing="ij")
    f = np.stack([a.reshape(-1) for a in mesh], axis=1).astype(np.int64)
    f = f[in_half_space(f)]
    f = f[np.lexsort(f.T[::-1])]
    f.setflags(write=False)
    return f


def _sort_rows(freqs):
    return np.lexsort(freqs.T[::-1]) if len(freqs) else np.arange(0)


def _encode(freqs, radius):
    """Injective integer keys for frequencies with |f|_inf <= radius."""
    S = 2 * radius + 1
    radix = S ** np.arange(freqs.shape[1], dtype=np.int64)
    return (freqs + radius) @ radix


def _decode(keys, radius, dim):
    S = 2 * radius + 1
    radix = S ** np.arange(dim, dtype=np.int64)
    return (keys[:, None] // radix) % S - radius


@dataclass(frozen=True)
class ConstantOneForm:
    """Translation-invariant (hence closed) 1-form ``sum_i c_i dx^i``."""

    model: TorusModel
    components: Tuple[float, ...]

    def __post_init__(self):
        comps = tuple(float(c) for c in np.asarray(self.components, dtype=float).reshape(-1))
        if len(comps) != self.model.dim:
            raise ValueError(f"theta needs {self.model.dim} components, got {len(comps)}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def zero(cls, model):
        return cls(model, (0.0,) * model.dim)

    @classmethod
    def dt(cls, model):
        if model.t_axis is None:
            raise ValueError("model has no t axis")
        c = [0.0] * model.dim
        c[model.t_axis] = 1.0
        return cls(model, tuple(c))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.components)

    def as_form(self) -> "BandForm":
        return BandForm.constant(self.model, 1, {(i,): c for i, c in enumerate(self.components)})


@dataclass(frozen=True, eq=False)
class BandForm:
    """Immutable band-limited real k-form; see the module docstring.

    ``freqs`` (N, m) holds distinct half-space frequencies in lexicographic
    order and ``coeffs`` (N, C(m, k)) the complex coefficients. Rows absent
    from ``freqs`` are zero.
    """

    model: TorusModel
    degree: int
    freqs: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        m, k = self.model.dim, self.degree
        if not 0 <= k <= m:
            raise ValueError(f"degree {k} out of range for T^{m}")
        freqs = np.asarray(self.freqs, dtype=np.int64).reshape(-1, m)
        coeffs = np.asarray(self.coeffs, dtype=np.complex128).reshape(len(freqs), comb(m, k))
        if len(freqs):
            if np.abs(freqs).max() > self.model.band:
                raise ValueError(
                    f"frequency {freqs[np.abs(freqs).max(axis=1).argmax()].tolist()} "
                    f"exceeds band {self.model.band}"
                )
            if not in_half_space(freqs).all():
                raise ValueError("stored frequencies must lie in the half-space")
        freqs.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "coeffs", coeffs)

    # -- construction -----------------------------------------------------

    @classmethod
    def _from_half(cls, model, degree, freqs, coeffs):
        """Canonicalise half-space rows: merge duplicates, drop exact zeros."""
        m = model.dim
        freqs = np.asarray(freqs, dtype=np.int64).reshape(-1, m)
        coeffs = np.asarray(coeffs, dtype=np.complex128).reshape(len(freqs), comb(m, degree))
        if len(freqs):
            keys = _encode(freqs, int(np.abs(freqs).max()))
            ukeys, first, inv = np.unique(keys, return_index=True, return_inverse=True)
            if len(ukeys) != len(freqs):
                merged = np.zeros((len(ukeys), coeffs.shape[1]), dtype=np.complex128)
                np.add.at(merged, inv.reshape(-1), coeffs)
                freqs, coeffs = freqs[first], merged
            order = _sort_rows(freqs)
            freqs, coeffs = freqs[order], coeffs[order]
            zero = ~np.any(freqs, axis=1)
            if zero.any():
                coeffs = coeffs.copy()
                coeffs[zero] = coeffs[zero].real
            keep = np.any(coeffs != 0, axis=1)
            freqs, coeffs = freqs[keep], coeffs[keep]
        return cls(model, degree, freqs, coeffs)

    @classmethod
    def _fold(cls, model, degree, freqs, coeffs):
        """Move rows outside the half-space to their conjugate partner."""
        freqs = np.array(freqs, dtype=np.int64)
        coeffs = np.array(coeffs, dtype=np.complex128)
        out = ~in_half_space(freqs) if len(freqs) else np.zeros(0, bool)
        freqs[out] *= -1
        coeffs[out] = np.conj(coeffs[out])
        return cls._from_half(model, degree, freqs, coeffs)

    @classmethod
    def zero(cls, model, degree):
        m = model.dim
        return cls(model, degree, np.zeros((0, m), np.int64), np.zeros((0, comb(m, degree))))

    @classmethod
    def constant(cls, model, degree, components: Dict[tuple, float]):
        """Constant-coefficient form from ``{multi_index: value}``."""
        pos = multi_index_position(model.dim, degree)
        c = np.zeros((1, comb(model.dim, degree)), dtype=np.complex128)
        for I, v in components.items():
            c[0, pos[_check_index(I, model.dim, degree)]] += float(v)
        return cls._from_half(model, degree, np.zeros((1, model.dim), np.int64), c)

    @classmethod
    def from_entries(cls, model, degree, entries: Dict[Tuple[tuple, tuple], complex]):
        """Build from ``{(frequency, multi_index): coefficient}``.

        Entries may come from either half of frequency space; when both
        ``f`` and ``-f`` appear they must be complex conjugates, and the
        ``f = 0`` coefficients must be real.
        """
        m = model.dim
        pos = multi_index_position(m, degree)
        store: Dict[tuple, np.ndarray] = {}
        seen: Dict[tuple, np.ndarray] = {}
        scale = max([1.0] + [abs(complex(v)) for v in entries.values()])
        for (f, I), v in entries.items():
            f = tuple(int(x) for x in f)
            if len(f) != m:
                raise ValueError(f"frequency {f} has wrong length for T^{m}")
            col = pos[_check_index(I, m, degree)]
            v = complex(v)
            if in_half_space(np.array([f]))[0]:
                key, val = f, v
            else:
                key, val = tuple(-x for x in f), np.conj(v)
            row = store.setdefault(key, np.zeros(comb(m, degree), np.complex128))
            flags = seen.setdefault(key, np.zeros(comb(m, degree), bool))
            if flags[col]:
                if abs(row[col] - val) > REALITY_TOL * scale:
                    raise ValueError(
                        f"entries at {key} and its negative are not conjugate: "
                        f"{row[col]!r} vs {val!r}"
                    )
            else:
                row[col] = val
                flags[col] = True
            if not any(key) and abs(val.imag) > REALITY_TOL * scale:
                raise ValueError(f"zero-frequency coefficient {v!r} is not real")
        if not store:
            return cls.zero(model, degree)
        freqs = np.array(list(store.keys()), dtype=np.int64)
        coeffs = np.array(list(store.values()))
        return cls._from_half(model, degree, freqs, coeffs)

    @classmethod
    def from_terms(cls, model, degree, terms: Iterable[tuple]):
        """Sum of ``(amplitude, kind, frequency, multi_index)`` terms.

        ``kind`` is ``"cos"`` or ``"sin"``: the term is
        ``amplitude * cos(f.x) dx^I`` (resp. ``sin``).
        """
        m = model.dim
        pos = multi_index_position(m, degree)
        freqs, rows = [], []
        for amp, kind, f, I in terms:
            f = np.asarray(f, dtype=np.int64).reshape(m)
            row = np.zeros(comb(m, degree), np.complex128)
            col = pos[_check_index(I, m, degree)]
            if not f.any():
                if kind == "cos":
                    row[col] = amp
                elif kind != "sin":
                    raise ValueError(f"unknown term kind {kind!r}")
            elif kind == "cos":
                row[col] = amp / 2.0
            elif kind == "sin":
                row[col] = -0.5j * amp
            else:
                raise ValueError(f"unknown term kind {kind!r}")
            freqs.append(f)
            rows.append(row)
        if not freqs:
            return cls.zero(model, degree)
        return cls._fold(model, degree, np.array(freqs), np.array(rows))

    # -- basic algebra ----------------------------------------------------

    @property
    def dim(self) -> int:
        return self.model.dim

    @property
    def band(self) -> int:
        return self.model.band

    @property
    def actual_band(self) -> int:
        return int(np.abs(self.freqs).max()) if len(self.freqs) else 0

    def with_band(self, band: int) -> "BandForm":
        return BandForm(self.model.with_band(band), self.degree, self.freqs, self.coeffs)

    def _check_compatible(self, other):
        if not isinstance(other, BandForm):
            raise TypeError(f"expected BandForm, got {type(other).__name__}")
        if not self.model.compatible(other.model):
            raise ValueError(f"model mismatch: {self.model} vs {other.model}")

    def __add__(self, other):
        self._check_compatible(other)
        if self.degree != other.degree:
            raise ValueError("cannot add forms of different degree")
        model = self.model.with_band(max(self.band, other.band))
        return BandForm._from_half(
            model,
            self.degree,
            np.vstack([self.freqs, other.freqs]),
            np.vstack([self.coeffs, other.coeffs]),
        )

    def __neg__(self):
        return BandForm(self.model, self.degree, self.freqs, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s):
        s = float(s)
        return BandForm._from_half(self.model, self.degree, self.freqs, s * self.coeffs)

    __rmul__ = __mul__

    def full(self) -> Tuple[np.ndarray, np.ndarray]:
        """Both halves of frequency space: (freqs, coeffs) with conjugates."""
        nz = np.any(self.freqs, axis=1)
        return (
            np.vstack([self.freqs, -self.freqs[nz]]),
            np.vstack([self.coeffs, np.conj(self.coeffs[nz])]),
        )

    def entries(self) -> Dict[Tuple[tuple, tuple], complex]:
        """Stored (half-space) entries as a dict; zeros omitted."""
        idx = multi_indices(self.dim, self.degree)
        out = {}
        for f, row in zip(self.freqs, self.coeffs):
            for I, v in zip(idx, row):
                if v != 0:
                    out[(tuple(int(x) for x in f), I)] = complex(v)
        return out

    def max_abs(self) -> float:
        return float(np.abs(self.coeffs).max(initial=0.0))

    def coefficient_distance(self, other: "BandForm") -> float:
        """Max |difference| over all coefficients (either half of the box)."""
        if self.degree != other.degree:
            raise ValueError("degree mismatch")
        return (self - other).max_abs()

    def component(self, index: tuple) -> "BandForm":
        """The coefficient function of ``dx^index`` as a 0-form."""
        col = multi_index_position(self.dim, self.degree)[tuple(index)]
        return BandForm._from_half(self.model, 0, self.freqs, self.coeffs[:, col : col + 1])

    def is_t_independent(self, tol: float = 0.0) -> bool:
        t = self.model.t_axis
        if t is None:
            raise ValueError("model has no t axis")
        moving = self.freqs[:, t] != 0
        return bool(np.all(np.abs(self.coeffs[moving]) <= tol))

    # -- evaluation -------------------------------------------------------

    def evaluate(self, points) -> np.ndarray:
        """Real component values at points: shape (P, C(m, k))."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if pts.shape[1] != self.dim:
            raise ValueError(f"points must have {self.dim} coordinates")
        if not len(self.freqs):
            return np.zeros((len(pts), self.coeffs.shape[1]))
        weight = np.where(np.any(self.freqs, axis=1), 2.0, 1.0)
        out = np.empty((len(pts), self.coeffs.shape[1]))
        wc = weight[:, None] * self.coeffs
        for s in range(0, len(pts), 4096):
            phase = np.exp(1j * (pts[s : s + 4096] @ self.freqs.T))
            out[s : s + 4096] = (phase @ wc).real
        return out

    def matrices(self, points) -> np.ndarray:
        """For 2-forms: the antisymmetric matrices ``omega(e_i, e_j)``."""
        if self.degree != 2:
            raise ValueError("matrices() needs a 2-form")
        from .multilinear import bivector_matrix

        return bivector_matrix(self.evaluate(points), self.dim)

    def __repr__(self):
        return (
            f"BandForm(degree={self.degree}, dim={self.dim}, band={self.band}, "
            f"t_axis={self.model.t_axis}, modes={len(self.freqs)})"
        )

    # -- text format ------------------------------------------------------

    def to_text(self) -> str:
        t = "none" if self.model.t_axis is None else str(self.model.t_axis)
        lines = [
            "# conecontact band form",
            f"dim {self.dim}",
            f"band {self.band}",
            f"t_axis {t}",
            f"degree {self.degree}",
        ]
        idx = multi_indices(self.dim, self.degree)
        for f, row in zip(self.freqs, self.coeffs):
            fs = ",".join(str(int(x)) for x in f)
            for I, v in zip(idx, row):
                if v != 0:
                    lines.append(f"{fs} | {'<'.join(map(str, I))} | {_fmt(v.real)},{_fmt(v.imag)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BandForm":
        header: Dict[str, str] = {}
        entries = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                if "|" in line:
                    f, I, v = (part.strip() for part in line.split("|"))
                    freq = tuple(int(x) for x in f.split(","))
                    index = tuple(int(x) for x in I.split("<")) if I else ()
                    re, im = (float(x) for x in v.split(","))
                    entries.append((freq, index, complex(re, im)))
                else:
                    key, value = line.split()
                    header[key] = value
            except ValueError as exc:
                raise FormatError(f"line {lineno}: cannot parse {raw!r}") from exc
        try:
            t = header.get("t_axis", "none")
            model = TorusModel(
                int(header["dim"]), int(header["band"]), None if t == "none" else int(t)
            )
            degree = int(header["degree"])
        except KeyError as exc:
            raise FormatError(f"missing header field {exc.args[0]!r}") from exc
        except ValueError as exc:
            raise FormatError(str(exc)) from exc
        m = model.dim
        pos = multi_index_position(m, degree)
        rows: Dict[tuple, np.ndarray] = {}
        for freq, index, v in entries:
            if len(freq) != m:
                raise FormatError(f"frequency {freq} has wrong length")
            if index not in pos:
                raise FormatError(f"bad multi-index {index} for degree {degree}")
            if not in_half_space(np.array([freq]))[0]:
                raise FormatError(f"frequency {freq} is not in the stored half-space")
            rows.setdefault(freq, np.zeros(comb(m, degree), np.complex128))[pos[index]] = v
        if not rows:
            return cls.zero(model, degree)
        freqs = np.array(list(rows.keys()), dtype=np.int64)
        coeffs = np.array(list(rows.values()))
        order = _sort_rows(freqs)
        try:
            return cls(model, degree, freqs[order], coeffs[order])
        except ValueError as exc:
            raise FormatError(str(exc)) from exc


class FormatError(ValueError):
    """Malformed form or cone text."""


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _check_index(I, m, k) -> tuple:
    I = tuple(int(i) for i in I)
    if len(I) != k or any(a >= b for a, b in zip(I, I[1:])) or any(not 0 <= i < m for i in I):
        raise ValueError(f"multi-index {I} is not strictly increasing of length {k} in range {m}")
    return I


# -- operators ------------------------------------------------------------


def wedge(a: BandForm, b: BandForm) -> BandForm:
    """Exact wedge product; the result's band is band(a) + band(b)."""
    a._check_compatible(b)
    m, p, q = a.dim, a.degree, b.degree
    if p + q > m:
        raise ValueError(f"degree overflow: {p} + {q} > {m}")
    model = a.model.with_band(a.band + b.band)
    if not len(a.freqs) or not len(b.freqs) or comb(m, p + q) == 0:
        return BandForm.zero(model, p + q)
    fa, ca = a.full()
    fb, cb = b.full()
    R = a.actual_band + b.actual_band
    # key(fa + fb) = (fa + R) . radix + fb . radix
    radix = (2 * R + 1) ** np.arange(m, dtype=np.int64)
    keys = (_encode(fa, R)[:, None] + (fb @ radix)[None, :]).ravel()
    box = (2 * R + 1) ** m
    if box <= max(4 * len(keys), 1 << 16):
        # small frequency box: bin straight into it, no sort
        uniq, inv = np.arange(box, dtype=np.int64), keys
    else:
        uniq, inv = np.unique(keys, return_inverse=True)
        inv = inv.reshape(-1)
    out = np.zeros((len(uniq), comb(m, p + q)), dtype=np.complex128)
    n = len(uniq)
    table = wedge_table(m, p, q)
    for K in np.unique(table[:, 2]):
        I, J, _, s = table[table[:, 2] == K].T
        # all terms landing on dx^K at once, as one matrix product
        prod = ((ca[:, I] * s) @ cb[:, J].T).ravel()
        out[:, K] = np.bincount(inv, prod.real, minlength=n) + 1j * np.bincount(
            inv, prod.imag, minlength=n)
    freqs = _decode(uniq, R, m)
    keep = in_half_space(freqs)
    return BandForm._from_half(model, p + q, freqs[keep], out[keep])


def _apply_frequency_operator(a: BandForm, theta) -> BandForm:
    m, k = a.dim, a.degree
    if k >= m:
        raise ValueError(f"degree {k} form has no derivative on T^{m}")
    E = left_wedge_matrices(m, k)
    factor = 1j * a.freqs + np.asarray(theta, dtype=np.float64)[None, :]
    out = np.einsum("nj,jab,nb->na", factor, E, a.coeffs)
    return BandForm._from_half(a.model, k + 1, a.freqs, out)


def exterior_d(a: BandForm) -> BandForm:
    return _apply_frequency_operator(a, np.zeros(a.dim))


def lichnerowicz_d(theta: ConstantOneForm, a: BandForm) -> BandForm:
    """``D_theta a = d a + theta ^ a``."""
    if not theta.model.compatible(a.model):
        raise ValueError(f"model mismatch: {theta.model} vs {a.model}")
    return _apply_frequency_operator(a, theta.array)


def pair_dirac(a: BandForm, point, P) -> float:
    """``a_x(P)`` for a grade-k multivector P at ``point``."""
    coeffs = P.coeffs if isinstance(P, Multivector) else np.asarray(P, dtype=np.float64)
    grade = P.grade if isinstance(P, Multivector) else a.degree
    if grade != a.degree or coeffs.shape != (comb(a.dim, a.degree),):
        raise ValueError(f"grade {grade} multivector cannot pair with a degree-{a.degree} form")
    return float(a.evaluate(np.asarray(point, dtype=np.float64)[None, :])[0] @ coeffs)


def pair_dirac_many(a: BandForm, points, coeffs) -> np.ndarray:
    """Vectorised :func:`pair_dirac` over rows of ``points`` and ``coeffs``."""
    return np.einsum("pa,pa->p", a.evaluate(points), np.asarray(coeffs, dtype=np.float64))


def pullback_band(L, band: int) -> int:
    """Band of the image of the box under f -> L^T f."""
    return int(band * np.abs(np.asarray(L)).sum(axis=0).max())


def pullback_affine(a: BandForm, action: TorusAction) -> BandForm:
    """``phi^* a`` for ``phi(x) = L x + b``; ``action.sign`` is not applied."""
    if action.dim != a.dim:
        raise ValueError("action dimension does not match the model")
    L = action.linear
    model = a.model.with_band(pullback_band(L, a.band))
    if not len(a.freqs):
        return BandForm.zero(model, a.degree)
    phase = np.exp(1j * (a.freqs @ action.translation))
    C = compound_matrix(L, a.degree)
    coeffs = (a.coeffs * phase[:, None]) @ C
    return BandForm._fold(model, a.degree, a.freqs @ L, coeffs)


def circle_average(a: BandForm) -> BandForm:
    """Average over the circle action along ``t_axis``: keep t-frequency 0."""
    t = a.model.t_axis
    if t is None:
        raise ValueError("circle_average needs a model with t_axis set")
    keep = a.freqs[:, t] == 0
    return BandForm(a.model, a.degree, a.freqs[keep], a.coeffs[keep])


def integrate_top(a: BandForm) -> float:
    if a.degree != a.dim:
        raise ValueError(f"integrate_top needs a degree-{a.dim} form, got degree {a.degree}")
    zero = ~np.any(a.freqs, axis=1)
    c0 = a.coeffs[zero, 0].real.sum() if zero.any() else 0.0
    return float(TWO_PI ** a.dim * c0)


def random_band_form(model, degree, rng, band=None, n_modes=None, scale=1.0) -> BandForm:
    """Random real form; all half-space modes up to ``band`` unless ``n_modes``."""
    band = model.band if band is None else band
    box = half_space_box(model.dim, band)
    if n_modes is not None and n_modes < len(box):
        box = box[np.sort(rng.choice(len(box), n_modes, replace=False))]
    n = comb(model.dim, degree)
    c = rng.normal(size=(len(box), n)) + 1j * rng.normal(size=(len(box), n))
    return BandForm._from_half(model.with_band(max(band, model.band)), degree, box, scale * c)


# -- real coordinates -----------------------------------------------------


class RealLayout:
    """Real coordinates on band-limited k-forms.

    Coordinates are ordered by half-space frequency: ``Re c[0, :]`` for the
    zero mode, then ``Re c[f, :], Im c[f, :]`` for each other ``f``.
    ``t_sector`` restricts to frequencies with zero t-component.
    """

    def __init__(self, model: TorusModel, degree: int, band: int, t_sector: bool = False):
        if t_sector and model.t_axis is None:
            raise ValueError("t_sector needs a model with t_axis")
        self.model = model.with_band(band)
        self.degree = degree
        self.band = band
        self.t_sector = t_sector
        self.freqs = half_space_box(model.dim, band, model.t_axis if t_sector else None)
        self.ncomp = comb(model.dim, degree)
        sizes = np.where(np.any(self.freqs, axis=1), 2 * self.ncomp, self.ncomp)
        self.offsets = np.concatenate([[0], np.cumsum(sizes)])
        self.size = int(self.offsets[-1])
        self._row = {tuple(f): n for n, f in enumerate(self.freqs.tolist())}

    def row_of(self, f) -> Optional[int]:
        return self._row.get(tuple(int(x) for x in f))

    def to_vector(self, form: BandForm) -> np.ndarray:
        if form.degree != self.degree or not form.model.compatible(self.model):
            raise ValueError("form does not match layout")
        v = np.zeros(self.size)
        for f, c in zip(form.freqs.tolist(), form.coeffs):
            n = self._row.get(tuple(f))
            if n is None:
                if np.any(c != 0):
                    raise ValueError(f"frequency {f} is outside the layout")
                continue
            o = self.offsets[n]
            v[o : o + self.ncomp] = c.real
            if any(f):
                v[o + self.ncomp : o + 2 * self.ncomp] = c.imag
        return v

    def to_form(self, vec) -> BandForm:
        vec = np.asarray(vec, dtype=np.float64)
        c = np.zeros((len(self.freqs), self.ncomp), np.complex128)
        for n in range(len(self.freqs)):
            o = self.offsets[n]
            c[n] = vec[o : o + self.ncomp]
            if self.offsets[n + 1] - o > self.ncomp:
                c[n] += 1j * vec[o + self.ncomp : o + 2 * self.ncomp]
        return BandForm._from_half(self.model, self.degree, self.freqs, c)

    def evaluation_rows(self, points, multivectors) -> np.ndarray:
        """Rows r with ``r @ to_vector(form) = form_x(P)`` per (x, P)."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        P = np.atleast_2d(np.asarray(multivectors, dtype=np.float64))
        arg = pts @ self.freqs.T
        weight = np.where(np.any(self.freqs, axis=1), 2.0, 1.0)
        cos = weight * np.cos(arg)
        sin = -weight * np.sin(arg)
        out = np.zeros((len(pts), self.size))
        for n in range(len(self.freqs)):
            o = self.offsets[n]
            out[:, o : o + self.ncomp] = cos[:, n : n + 1] * P
            if self.offsets[n + 1] - o > self.ncomp:
                out[:, o + self.ncomp : o + 2 * self.ncomp] = sin[:, n : n + 1] * P
        return out

    def block(self, n: int) -> slice:
        return slice(self.offsets[n], self.offsets[n + 1])
