import itertools

import numpy as np
import pytest

from conecontact.multilinear import (
    Bivector,
    bivector_matrix,
    compound_matrix,
    left_wedge_matrices,
    pfaffian,
    pfaffian_batch,
    schubert_intersects,
    sort_sign,
    wedge_table,
    wedge_vectors,
)

J0 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def e(i, m=4):
    v = np.zeros(m)
    v[i] = 1.0
    return v


def test_wedge_vectors_basis():
    b = wedge_vectors(e(0), e(1))
    assert isinstance(b, Bivector)
    np.testing.assert_array_equal(b.coeffs, [1, 0, 0, 0, 0, 0])


def test_wedge_vectors_alternating_and_bilinear():
    u = np.array([1.0, 2.0, -1.0, 0.5])
    assert wedge_vectors(u, u).is_zero()
    b = wedge_vectors(e(0) + e(1), e(2))
    # pairs (01, 02, 03, 12, 13, 23)
    np.testing.assert_array_equal(b.coeffs, [0, 1, 0, 1, 0, 0])


def test_wedge_vectors_dim_mismatch():
    with pytest.raises(ValueError):
        wedge_vectors(np.ones(3), np.ones(4))


def test_bivector_matrix_roundtrip():
    b = Bivector(4, np.arange(1.0, 7.0))
    assert np.allclose(Bivector.from_matrix(b.matrix()).coeffs, b.coeffs)
    assert np.allclose(b.matrix(), -b.matrix().T)


def test_pfaffian_examples():
    assert pfaffian(np.kron(np.eye(2), J0)) == pytest.approx(1.0)
    assert pfaffian(np.zeros((4, 4))) == 0.0
    z = 0.37
    Om = np.zeros((4, 4))
    Om[0, 1], Om[0, 2], Om[1, 3], Om[2, 3] = np.cos(z), np.sin(z), np.sin(z), -np.cos(z)
    Om = Om - Om.T
    assert pfaffian(Om) == pytest.approx(-1.0, abs=1e-12)
    assert pfaffian(Om) ** 2 == pytest.approx(np.linalg.det(Om), rel=1e-9)


def test_pfaffian_odd_dimension_rejected():
    with pytest.raises(ValueError):
        pfaffian(np.zeros((3, 3)))


def test_pfaffian_rejects_non_antisymmetric():
    with pytest.raises(ValueError):
        pfaffian(np.eye(2))


@pytest.mark.parametrize("n", [2, 4, 6])
def test_pfaffian_congruence(rng, n):
    for _ in range(20):
        A = rng.normal(size=(n, n))
        A = A - A.T
        G = rng.normal(size=(n, n))
        lhs = pfaffian(G.T @ A @ G)
        rhs = np.linalg.det(G) * pfaffian(A)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)
        assert pfaffian(A) ** 2 == pytest.approx(np.linalg.det(A), rel=1e-9)


def test_pfaffian_batch_matches_scalar(rng):
    A = rng.normal(size=(30, 6, 6))
    A = A - np.swapaxes(A, 1, 2)
    batch = pfaffian_batch(A)
    assert np.allclose(batch, [pfaffian(a) for a in A])


def test_sort_sign():
    assert sort_sign((0, 1, 2)) == 1
    assert sort_sign((1, 0, 2)) == -1
    assert sort_sign((2, 0, 1)) == 1
    assert sort_sign((1, 1)) == 0


def test_left_wedge_matrices_anticommute():
    m = 5
    for k in range(m - 1):
        E = left_wedge_matrices(m, k)
        E1 = left_wedge_matrices(m, k + 1)
        for i, j in itertools.product(range(m), repeat=2):
            assert np.array_equal(E1[i] @ E[j], -(E1[j] @ E[i]))


def test_wedge_table_consistent_with_left_wedge():
    m = 4
    E = left_wedge_matrices(m, 1)
    for a, b, K, s in wedge_table(m, 1, 1):
        assert E[a][K, b] == s


def test_compound_matrix_is_multiplicative(rng):
    A, B = rng.normal(size=(2, 4, 4))
    for k in range(5):
        assert np.allclose(compound_matrix(A @ B, k), compound_matrix(A, k) @ compound_matrix(B, k))


def test_bivector_matrix_stack():
    c = np.arange(12.0).reshape(2, 6)
    M = bivector_matrix(c, 4)
    assert M.shape == (2, 4, 4)
    assert M[1, 0, 1] == 6.0 and M[1, 1, 0] == -6.0


# -- Schubert test --------------------------------------------------------


def test_schubert_plane_is_own_member():
    w = schubert_intersects([wedge_vectors(e(0), e(1))], (e(0), e(1)), 360)
    assert w is not None
    assert w.grid_index == 0 and w.angle == 0.0
    np.testing.assert_allclose(w.weights, [1.0])
    np.testing.assert_allclose(wedge_vectors(w.v, w.w).coeffs, [1, 0, 0, 0, 0, 0], atol=1e-12)


def test_schubert_disjoint_plane_has_no_witness():
    assert schubert_intersects([wedge_vectors(e(0), e(1))], (e(2), e(3)), 360) is None


def _standard_cone(J, taus=()):
    probes = list(np.eye(J.shape[0])) + [u for tau in taus for u in tau]
    return [wedge_vectors(v, J @ v) for v in probes]


def test_schubert_cj_cone_with_tau_probes(rng):
    J = np.kron(np.eye(2), J0.T)  # J e0 = e1
    for _ in range(10):
        tau = rng.normal(size=(2, 4))
        assert schubert_intersects(_standard_cone(J, [tau]), tau, 90) is not None


def test_schubert_witness_verifies(rng):
    J = np.kron(np.eye(2), J0.T)
    tau = rng.normal(size=(2, 4))
    gens = _standard_cone(J, [tau])
    w = schubert_intersects(gens, tau, 60)
    G = np.array([g.coeffs for g in gens])
    assert np.all(w.weights >= 0) and w.weights.sum() == pytest.approx(1.0)
    assert np.allclose(wedge_vectors(w.v, w.w).coeffs, G.T @ w.weights, atol=1e-9)
    # v lies in tau
    coeff, *_ = np.linalg.lstsq(tau.T, w.v, rcond=None)
    assert np.allclose(tau.T @ coeff, w.v)


def test_schubert_monotone_in_generators(rng):
    J = np.kron(np.eye(2), J0.T)
    for _ in range(5):
        tau = rng.normal(size=(2, 4))
        base = [wedge_vectors(e(0), e(1))]
        extra = base + _standard_cone(J)
        if schubert_intersects(base, tau, 36) is not None:
            assert schubert_intersects(extra, tau, 36) is not None


def test_schubert_degenerate_tau():
    with pytest.raises(ValueError):
        schubert_intersects([wedge_vectors(e(0), e(1))], (e(0), 2 * e(0)))
