from math import comb

import numpy as np
import pytest

from conecontact.band_forms import (
    BandForm,
    ConstantOneForm,
    FormatError,
    RealLayout,
    circle_average,
    exterior_d,
    half_space_box,
    in_half_space,
    integrate_top,
    lichnerowicz_d,
    pair_dirac,
    pullback_affine,
    random_band_form,
    wedge,
)
from conecontact.multilinear import multi_indices, wedge_table, wedge_vectors
from conecontact.torus import TWO_PI, TorusAction, TorusModel

from helpers import thetas

T3 = TorusModel(3, 1)


def alpha_std():
    return BandForm.from_terms(T3, 1, [(1.0, "cos", (0, 0, 1), (0,)), (1.0, "sin", (0, 0, 1), (1,))])


def const(model, degree, comps):
    return BandForm.constant(model, degree, comps)


def pointwise_wedge(a, b, pts):
    """Oracle: wedge of sampled component values via the shuffle table."""
    A, B = a.evaluate(pts), b.evaluate(pts)
    out = np.zeros((len(pts), comb(a.dim, a.degree + b.degree)))
    for I, J, K, s in wedge_table(a.dim, a.degree, b.degree):
        out[:, K] += s * A[:, I] * B[:, J]
    return out


def fd_exterior_d(a, p, vectors, h=1e-5):
    """Oracle: sum_i (-1)^i v_i . grad a(v_0 .. ^v_i .. v_k) by central differences."""
    total = 0.0
    for i, v in enumerate(vectors):
        rest = [w for n, w in enumerate(vectors) if n != i]
        if not rest:
            P = np.ones(1)
        elif len(rest) == 1:
            P = np.asarray(rest[0])
        else:
            P = wedge_vectors(*rest).coeffs
        plus = a.evaluate(p + h * v)[0] @ P
        minus = a.evaluate(p - h * v)[0] @ P
        total += (-1) ** i * (plus - minus) / (2 * h)
    return total


# -- construction ---------------------------------------------------------


def test_half_space_membership():
    f = np.array([[0, 0], [0, 1], [0, -1], [1, -5], [-1, 3]])
    assert list(in_half_space(f)) == [True, True, False, True, False]
    box = half_space_box(2, 1)
    assert len(box) == 5 and not box[0].any()


def test_from_entries_enforces_reality():
    m = TorusModel(1, 1)
    f = BandForm.from_entries(m, 0, {((1,), ()): 0.5 + 0.5j, ((-1,), ()): 0.5 - 0.5j})
    x = np.array([[0.3]])
    assert f.evaluate(x)[0, 0] == pytest.approx(np.cos(0.3) - np.sin(0.3))
    with pytest.raises(ValueError):
        BandForm.from_entries(m, 0, {((1,), ()): 1.0, ((-1,), ()): 2.0})
    with pytest.raises(ValueError):
        BandForm.from_entries(m, 0, {((0,), ()): 1j})


def test_band_and_index_validation():
    m = TorusModel(2, 1)
    with pytest.raises(ValueError):
        BandForm.from_entries(m, 1, {((2, 0), (0,)): 1.0})
    with pytest.raises(ValueError):
        BandForm.constant(m, 2, {(1, 0): 1.0})
    with pytest.raises(ValueError):
        BandForm.zero(m, 3)


def test_from_terms_matches_trig():
    a = alpha_std()
    pts = np.random.default_rng(0).uniform(0, TWO_PI, size=(10, 3))
    z = pts[:, 2]
    np.testing.assert_allclose(a.evaluate(pts), np.column_stack([np.cos(z), np.sin(z), 0 * z]), atol=1e-15)


def test_text_roundtrip_exact(rng):
    for degree in range(4):
        a = random_band_form(TorusModel(3, 2), degree, rng)
        b = BandForm.from_text(a.to_text())
        assert np.array_equal(a.freqs, b.freqs)
        assert np.array_equal(a.coeffs, b.coeffs)
        assert b.to_text() == a.to_text()


def test_text_errors():
    with pytest.raises(FormatError):
        BandForm.from_text("dim 2\nband 1\ndegree 1\n0,1 | 0 | x,1\n")
    with pytest.raises(FormatError):
        BandForm.from_text("dim 2\ndegree 1\n")
    with pytest.raises(FormatError):
        BandForm.from_text("dim 2\nband 1\ndegree 1\n0,-1 | 0 | 1,0\n")


# -- wedge ----------------------------------------------------------------


def test_wedge_examples():
    dx = const(T3, 1, {(0,): 1.0})
    assert wedge(dx, dx).max_abs() == 0.0
    cz_dx = BandForm.from_terms(T3, 1, [(1.0, "cos", (0, 0, 1), (0,))])
    dzdy = const(T3, 2, {(1, 2): -1.0})  # dz ^ dy = -dy ^ dz
    expected = BandForm.from_terms(T3, 3, [(-1.0, "cos", (0, 0, 1), (0, 1, 2))])
    assert wedge(cz_dx, dzdy).coefficient_distance(expected) < 1e-15
    a = alpha_std()
    vol = wedge(a, exterior_d(a))
    assert vol.entries() == {((0, 0, 0), (0, 1, 2)): -1.0}


def test_wedge_band_grows():
    a = alpha_std()
    assert wedge(a, a.with_band(2)).band == 3


def test_wedge_errors():
    a = alpha_std()
    with pytest.raises(ValueError):
        wedge(a, const(TorusModel(2, 0), 1, {(0,): 1.0}))
    with pytest.raises(ValueError):
        wedge(const(T3, 2, {(0, 1): 1.0}), const(T3, 2, {(0, 1): 1.0}))


def test_wedge_matches_pointwise_oracle(rng):
    m = TorusModel(4, 2)
    pts = rng.uniform(0, TWO_PI, size=(25, 4))
    for p, q in [(0, 2), (1, 1), (1, 2), (2, 2), (1, 3)]:
        a = random_band_form(m, p, rng, band=1)
        b = random_band_form(m, q, rng, band=2)
        np.testing.assert_allclose(wedge(a, b).evaluate(pts), pointwise_wedge(a, b, pts), atol=1e-10)


def test_wedge_graded_commutativity(rng):
    m = TorusModel(4, 1)
    for p, q in [(1, 1), (1, 2), (2, 2)]:
        a, b = random_band_form(m, p, rng), random_band_form(m, q, rng)
        assert (wedge(a, b) - (-1) ** (p * q) * wedge(b, a)).max_abs() < 1e-12


# -- d and D_theta --------------------------------------------------------


def test_exterior_d_examples():
    assert exterior_d(const(T3, 0, {(): 3.0})).max_abs() == 0.0
    cz_dx = BandForm.from_terms(T3, 1, [(1.0, "cos", (0, 0, 1), (0,))])
    expected = BandForm.from_terms(T3, 2, [(1.0, "sin", (0, 0, 1), (0, 2))])
    assert exterior_d(cz_dx).coefficient_distance(expected) < 1e-15
    assert exterior_d(exterior_d(alpha_std())).max_abs() == 0.0


def test_exterior_d_finite_difference(rng):
    cz_dx = BandForm.from_terms(T3, 1, [(1.0, "cos", (0, 0, 1), (0,))])
    d = exterior_d(cz_dx)
    for _ in range(10):
        p = rng.uniform(0, TWO_PI, 3)
        u, v = rng.normal(size=(2, 3))
        assert pair_dirac(d, p, wedge_vectors(u, v)) == pytest.approx(fd_exterior_d(cz_dx, p, [u, v]), abs=1e-6)


@pytest.mark.parametrize("degree", [0, 1, 2])
def test_pair_dirac_of_d_matches_finite_difference(rng, degree):
    m = TorusModel(4, 2)
    a = random_band_form(m, degree, rng, scale=0.3)
    d = exterior_d(a)
    for _ in range(5):
        p = rng.uniform(0, TWO_PI, 4)
        V = list(rng.normal(size=(degree + 1, 4)))
        P = wedge_vectors(*V) if degree else None
        lhs = pair_dirac(d, p, P.coeffs if P is not None else V[0])
        assert lhs == pytest.approx(fd_exterior_d(a, p, V), abs=1e-6)


def test_degree_overflow():
    with pytest.raises(ValueError):
        exterior_d(const(T3, 3, {(0, 1, 2): 1.0}))


def test_lichnerowicz_examples():
    m = TorusModel(2, 1, 0)
    dt = ConstantOneForm.dt(m)
    one = const(m, 0, {(): 1.0})
    assert lichnerowicz_d(dt, one).entries() == {((0, 0), (0,)): 1.0}
    assert lichnerowicz_d(dt, dt.as_form()).max_abs() == 0.0
    a = random_band_form(m, 1, np.random.default_rng(1))
    zero = ConstantOneForm.zero(m)
    assert (lichnerowicz_d(zero, a) - exterior_d(a)).max_abs() == 0.0


def test_lichnerowicz_model_mismatch():
    with pytest.raises(ValueError):
        lichnerowicz_d(ConstantOneForm.zero(TorusModel(3)), const(TorusModel(2, 0, 0), 0, {(): 1.0}))


def test_constant_one_form_validation():
    with pytest.raises(ValueError):
        ConstantOneForm(TorusModel(2), (1.0,))
    with pytest.raises(ValueError):
        ConstantOneForm.dt(TorusModel(2))


def test_frequency_preservation(rng):
    m = TorusModel(3, 2, 0)
    a = random_band_form(m, 1, rng)
    for theta in thetas(m):
        Da = lichnerowicz_d(theta, a)
        for n, f in enumerate(a.freqs):
            single = BandForm(a.model, 1, a.freqs[n : n + 1], a.coeffs[n : n + 1])
            part = lichnerowicz_d(theta, single)
            assert set(map(tuple, part.freqs)) <= {tuple(f)}
            row = [k for k, g in enumerate(Da.freqs) if tuple(g) == tuple(f)]
            got = Da.coeffs[row[0]] if row else np.zeros(Da.coeffs.shape[1])
            want = part.coeffs[0] if len(part.freqs) else np.zeros_like(got)
            assert np.allclose(got, want)


def test_d_squared_zero(rng):
    m = TorusModel(4, 2, 0)
    for theta in thetas(m):
        for degree in range(3):
            for _ in range(5):
                a = random_band_form(m, degree, rng)
                assert lichnerowicz_d(theta, lichnerowicz_d(theta, a)).max_abs() <= 1e-12 * max(1, a.max_abs())


def test_derivation_identity(rng):
    m = TorusModel(4, 1, 0)
    for theta in thetas(m):
        for p, q in [(0, 1), (1, 1), (1, 2), (0, 2)]:
            a, b = random_band_form(m, p, rng), random_band_form(m, q, rng)
            lhs = lichnerowicz_d(theta, wedge(a, b))
            rhs = wedge(lichnerowicz_d(theta, a), b) + (-1) ** p * wedge(a, exterior_d(b))
            assert (lhs - rhs).max_abs() <= 1e-12 * max(1.0, lhs.max_abs())


# -- evaluation -----------------------------------------------------------


def test_pair_dirac_examples():
    m = TorusModel(2, 0)
    dxdy = const(m, 2, {(0, 1): 1.0})
    ex, ey = np.eye(2)
    assert pair_dirac(dxdy, [0.3, 0.2], wedge_vectors(ex, ey)) == 1.0
    assert pair_dirac(dxdy, [0.3, 0.2], wedge_vectors(ey, ex)) == -1.0
    da = exterior_d(alpha_std())
    e = np.eye(3)
    assert pair_dirac(da, [0, 0, np.pi / 2], wedge_vectors(e[2], e[0])) == pytest.approx(-1.0)


def test_pair_dirac_grade_mismatch():
    with pytest.raises(ValueError):
        pair_dirac(alpha_std(), [0, 0, 0], wedge_vectors(np.eye(3)[0], np.eye(3)[1]))


def test_pair_dirac_linear(rng):
    m = TorusModel(3, 1)
    a, b = random_band_form(m, 2, rng), random_band_form(m, 2, rng)
    p = rng.uniform(0, TWO_PI, 3)
    P, Q = rng.normal(size=(2, 3))
    assert pair_dirac(2 * a - b, p, P) == pytest.approx(2 * pair_dirac(a, p, P) - pair_dirac(b, p, P))
    assert pair_dirac(a, p, P + 3 * Q) == pytest.approx(pair_dirac(a, p, P) + 3 * pair_dirac(a, p, Q))


# -- pullback -------------------------------------------------------------


def test_pullback_examples():
    a = alpha_std()
    assert (pullback_affine(a, TorusAction.identity(3)) - a).max_abs() == 0.0
    shifted = pullback_affine(a, TorusAction.translate([0, 0, np.pi]))
    assert (shifted + a).max_abs() < 1e-15
    m = TorusModel(2, 1, 0)
    f = BandForm.from_terms(m, 1, [(1.0, "cos", (0, 1), (1,))])
    assert (pullback_affine(f, TorusAction.translate([0.7, 0])) - f).max_abs() == 0.0


def test_pullback_matches_pointwise(rng):
    m = TorusModel(3, 1)
    L = np.array([[1, 1, 0], [0, 1, 0], [0, 1, 1]])
    phi = TorusAction(L, rng.uniform(0, TWO_PI, 3))
    for degree in range(4):
        a = random_band_form(m, degree, rng)
        pb = pullback_affine(a, phi)
        assert pb.band == 3  # largest column abs-sum of L
        p = rng.uniform(0, TWO_PI, (6, 3))
        V = rng.normal(size=(degree, 3))
        P = wedge_vectors(*V).coeffs if degree > 1 else (V[0] if degree else np.ones(1))
        LP = wedge_vectors(*(V @ L.T)).coeffs if degree > 1 else (L @ V[0] if degree else np.ones(1))
        assert np.allclose(pb.evaluate(p) @ P, a.evaluate(phi.apply(p)) @ LP)


def test_pullback_composition(rng):
    m = TorusModel(3, 1)
    rho = TorusAction(np.array([[1, 0, 0], [0, 0, -1], [0, 1, 0]]), rng.uniform(0, 6, 3))
    sigma = TorusAction(np.array([[-1, 0, 0], [0, 1, 0], [0, 0, 1]]), rng.uniform(0, 6, 3))
    a = random_band_form(m, 2, rng)
    lhs = pullback_affine(a, rho.compose(sigma))
    rhs = pullback_affine(pullback_affine(a, rho), sigma)
    assert lhs.coefficient_distance(rhs) < 1e-13


# -- averaging and integration -------------------------------------------


def test_circle_average_examples():
    m = TorusModel(2, 1, 0)
    dx = const(m, 1, {(1,): 1.0})
    assert (circle_average(dx) - dx).max_abs() == 0.0
    cos_t_dx = BandForm.from_terms(m, 1, [(1.0, "cos", (1, 0), (1,))])
    assert circle_average(cos_t_dx).max_abs() == 0.0
    assert (circle_average(2 * dx + cos_t_dx) - 2 * dx).max_abs() == 0.0
    with pytest.raises(ValueError):
        circle_average(alpha_std())


def test_circle_average_commutes_with_D(rng):
    m = TorusModel(3, 2, 0)
    dt = ConstantOneForm.dt(m)
    for degree in range(3):
        a = random_band_form(m, degree, rng)
        lhs = circle_average(lichnerowicz_d(dt, a))
        rhs = lichnerowicz_d(dt, circle_average(a))
        assert (lhs - rhs).max_abs() <= 1e-12
        assert (circle_average(circle_average(a)) - circle_average(a)).max_abs() == 0.0


def test_integrate_top_examples():
    assert integrate_top(const(T3, 3, {(0, 1, 2): 1.0})) == pytest.approx(TWO_PI**3)
    assert integrate_top(BandForm.from_terms(T3, 3, [(1.0, "cos", (0, 0, 1), (0, 1, 2))])) == 0.0
    a = alpha_std()
    assert integrate_top(wedge(a, exterior_d(a))) == pytest.approx(-(TWO_PI**3), abs=1e-9)
    with pytest.raises(ValueError):
        integrate_top(a)


# -- real layout ----------------------------------------------------------


def test_layout_roundtrip(rng):
    m = TorusModel(3, 2, 0)
    for sector in (False, True):
        lay = RealLayout(m, 2, 2, sector)
        v = rng.normal(size=lay.size)
        form = lay.to_form(v)
        assert np.allclose(lay.to_vector(form), v)
        pts = rng.uniform(0, TWO_PI, (7, 3))
        P = rng.normal(size=(7, 3))
        assert np.allclose(lay.evaluation_rows(pts, P) @ v, np.einsum("pa,pa->p", form.evaluate(pts), P))
        if sector:
            assert form.is_t_independent()
