from itertools import permutations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cubicball.families import case_b_maxima, fourth_maximum
from cubicball.gramian import (
    BarycentricZ,
    HessianStatus,
    Regime,
    b_from_z,
    barycentric_origin,
    case_b_gram_parameters,
    cubic_from_quadruple,
    gram_case_b,
    gram_central,
    gram_from_z,
    gram_wing,
    hessian_classification,
    linear_system,
    linear_system_determinant,
    mixed_coefficients,
    points_from_gram,
    ratio_hessian,
    ratio_hessian_numeric,
)
from cubicball.poly import apply_orthogonal, gradient, random_orthogonal
from cubicball.sphere import CriticalCircle, Morse, brute_force_norm, critical_points_s2

TETRA = np.full((4, 4), -1 / 3) + np.eye(4) * (4 / 3)


def central_b(rng):
    return rng.dirichlet(np.ones(4))


def wing_b(rng):
    return rng.uniform(0.02, 5.0, 3)


def regime_z(rng):
    if rng.random() < 0.5:
        return (1 - central_b(rng)) / 3
    b = wing_b(rng)
    return np.append((1 + b) / 3, -b.sum() / 3)


def assert_rank3_psd(gram, tol=1e-10):
    w = np.linalg.eigvalsh(gram)
    assert abs(w[0]) <= tol and w[1] > 0


# ----------------------------------------------------------- barycentric


def test_barycentric_validation():
    with pytest.raises(ValueError):
        BarycentricZ(np.array([0.5, 0.5, 0.0, 0.0]))
    with pytest.raises(ValueError):
        BarycentricZ(np.array([0.3, 0.3, 0.3, 0.3]))
    with pytest.raises(ValueError):
        BarycentricZ(np.array([1.0, 0.0]))
    assert np.allclose(BarycentricZ(np.full(4, 0.25)).g, 1.0)


# --------------------------------------------------------------- Gramians


def test_gram_from_z_examples():
    g = gram_from_z(np.full(4, 0.25))
    assert np.allclose(g.matrix, TETRA, atol=1e-15)
    g = gram_from_z([2 / 3, 2 / 3, 2 / 3, -1.0])
    assert g.matrix[0, 1] == pytest.approx(-1 / 8) and g.matrix[0, 3] == pytest.approx(0.5)
    assert np.allclose(g.matrix, gram_wing([1.0, 1.0, 1.0]).matrix, atol=1e-15)


def test_regime_gramians_are_rank3_psd(rng):
    for _ in range(1000):
        g = gram_from_z(regime_z(rng))
        assert g.kernel_residual() <= 1e-10
        assert_rank3_psd(g.matrix)
        off = g.matrix[~np.eye(4, dtype=bool)]
        assert np.all(off > -0.5) and np.all(off < 1.0)
        assert g.is_valid()


def test_gram_central(rng):
    assert np.allclose(gram_central([0.25] * 4).matrix, TETRA, atol=1e-15)
    assert gram_central([0.1, 0.2, 0.3, 0.4]).is_valid()
    for _ in range(1000):
        b = central_b(rng)
        g = gram_central(b)
        assert np.max(np.abs(g.matrix - gram_from_z((1 - b) / 3).matrix)) <= 1e-12
        det = 9 * np.prod(b) * (np.sum(1 / b) - 4) / (4 * np.prod((1 - b[:3]) ** 2))
        assert np.linalg.det(g.matrix[:3, :3]) == pytest.approx(det, rel=1e-8, abs=1e-14)
    with pytest.raises(ValueError):
        gram_central([0.5, 0.5, 0.0, 0.0])
    with pytest.raises(ValueError):
        gram_central([0.2, 0.2, 0.2, 0.2])


def test_gram_wing(rng):
    for _ in range(1000):
        b = wing_b(rng)
        g = gram_wing(b)
        z = np.append((1 + b) / 3, -b.sum() / 3)
        assert np.max(np.abs(g.matrix - gram_from_z(z).matrix)) <= 1e-12
        s = b.sum()
        e2 = b[0] * b[1] + b[0] * b[2] + b[1] * b[2]
        det = 9 * (4 * np.prod(b) * (s + 0.75) + (s + 1) * e2) / (4 * np.prod((b + 1) ** 2))
        assert np.linalg.det(g.matrix[:3, :3]) == pytest.approx(det, rel=1e-8)
        assert np.linalg.eigvalsh(g.matrix)[0] <= 1e-10
    with pytest.raises(ValueError):
        gram_wing([1.0, 0.0, 1.0])


def test_gram_case_b():
    g = gram_case_b([0.0, 0.0, 0.0])
    pts = case_b_maxima(0.0, 0.0)
    assert np.allclose(g.matrix, pts @ pts.T, atol=1e-15)
    assert_rank3_psd(gram_case_b([0.2, -0.1, -0.1]).matrix)
    assert gram_case_b([0.2, -0.1, -0.1]).kernel_residual() <= 1e-15
    with pytest.raises(ValueError):
        gram_case_b([0.2, 0.1, 0.0])


def test_gram_case_b_matches_case_b_cubics(rng):
    for _ in range(100):
        x = rng.uniform(0.001, 0.499)
        y = rng.uniform(0.0, np.sqrt(3) * x)
        pts = case_b_maxima(x, y)
        b = case_b_gram_parameters(fourth_maximum(x, y))
        assert np.allclose(gram_case_b(b).matrix, pts @ pts.T, atol=1e-12)


def test_case_b_gramians_are_limits(rng):
    for _ in range(50):
        c = rng.dirichlet(np.ones(3))
        want = gram_case_b(-0.5 + 1.5 * c).matrix
        # central family towards a vertex, wing family towards zero
        for eps, tol in ((1e-4, 1e-3), (1e-6, 1e-5)):
            central = gram_central(np.append(eps * c, 1 - eps)).matrix
            assert np.max(np.abs(central - want)) <= tol
            wing = gram_wing(eps * c).matrix
            assert np.max(np.abs(wing - want)) <= tol


# ----------------------------------------------------------- point recovery


def test_points_from_tetrahedron():
    u = points_from_gram(gram_central([0.25] * 4))
    assert np.allclose(u @ u.T, TETRA, atol=1e-12)
    assert np.allclose(u[0], [1, 0, 0], atol=1e-12)


def test_points_round_trip(rng):
    for _ in range(1000):
        g = gram_from_z(regime_z(rng))
        u = points_from_gram(g)
        assert np.max(np.abs(u @ u.T - g.matrix)) <= 1e-10
        assert np.max(np.abs(g.z @ u)) <= 1e-10
        assert np.allclose(barycentric_origin(u), g.z, atol=1e-9)


def test_points_from_gram_rejects():
    with pytest.raises(ValueError):
        points_from_gram(np.eye(4))
    with pytest.raises(ValueError):
        points_from_gram(np.full((4, 4), -1.0) + 2 * np.eye(4))
    bad = TETRA.copy()
    bad[0, 0] = 2.0
    with pytest.raises(ValueError):
        points_from_gram(bad)


# ---------------------------------------------------------- unique cubic


def tetra_rotations(u):
    """The 12 rotations permuting the vertices by even permutations."""
    out = []
    for perm in permutations(range(4)):
        if np.linalg.det(np.eye(4)[list(perm)]) < 0:
            continue
        m = u[list(perm)].T @ np.linalg.pinv(u.T)
        out.append(m)
    return out


def test_tetrahedral_cubic():
    qc = cubic_from_quadruple(points_from_gram(gram_central([0.25] * 4)))
    assert qc.q_coeffs["123"] == pytest.approx(1 / 3, abs=1e-14)
    rots = tetra_rotations(qc.points)
    assert len(rots) == 12
    for r in rots:
        assert np.allclose(r @ r.T, np.eye(3), atol=1e-12) and np.linalg.det(r) == pytest.approx(1.0)
        assert apply_orthogonal(qc.cubic, r).allclose(qc.cubic, 1e-12)


def test_quadruple_cubic_invariants(rng):
    for _ in range(100):
        u = points_from_gram(gram_from_z(regime_z(rng)))
        qc = cubic_from_quadruple(u)
        q, z = qc.q, qc.z
        assert np.allclose(np.einsum("iii->i", q), 1.0)
        for i in range(4):
            for j in range(4):
                if i != j:
                    assert q[i, i, j] == pytest.approx(qc.gram[i, j], abs=1e-15)
        assert np.max(np.abs(np.einsum("ijk,k->ij", q, z))) <= 1e-10
        # the gradient of q is orthogonal to z everywhere
        for y in rng.standard_normal((100, 4)):
            assert abs(3 * np.einsum("ijk,j,k->i", q, y, y) @ z) <= 1e-9 * max(1.0, y @ y)
        for x in u:
            assert qc.cubic(x) == pytest.approx(1.0, abs=1e-10)
            assert np.linalg.norm(gradient(qc.cubic, x) - 3 * x) <= 1e-8


def test_quadruple_errors():
    with pytest.raises(ValueError):
        cubic_from_quadruple(np.eye(3)[[0, 1, 2, 0]])
    with pytest.raises(ValueError, match="great circle"):
        # the origin is the midpoint of two of the points, so two barycentric entries vanish
        cubic_from_quadruple(np.array([[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, 0, 1.0]]))
    with pytest.raises(ValueError, match="mismatch"):
        cubic_from_quadruple(np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, -1, -2]]) / np.sqrt([1, 1, 1, 6])[:, None])
    with pytest.raises(ValueError):
        cubic_from_quadruple(np.ones((4, 3)))


def test_quadruple_equivariance(rng):
    for _ in range(30):
        u = points_from_gram(gram_from_z(regime_z(rng)))
        q = random_orthogonal(rng)
        a = cubic_from_quadruple(u @ q.T).cubic
        b = apply_orthogonal(cubic_from_quadruple(u).cubic, q)
        assert a.allclose(b, 1e-9)


def test_linear_system_oracle(rng):
    for _ in range(100):
        z = regime_z(rng)
        m, rhs = linear_system(z)
        det = linear_system_determinant(z)
        assert np.linalg.det(m) == pytest.approx(det, rel=1e-8)
        assert det != 0
        sol = np.linalg.solve(m, rhs)
        g = gram_from_z(z)
        gram = g.matrix
        assert np.allclose(sol[:6], [gram[0, 1], gram[0, 2], gram[0, 3], gram[1, 2], gram[1, 3], gram[2, 3]], atol=1e-9)
        mixed = mixed_coefficients(-3 + 1 / z)
        assert np.allclose(sol[6:], [mixed[(1, 2, 3)], mixed[(0, 2, 3)], mixed[(0, 1, 3)], mixed[(0, 1, 2)]], atol=1e-8)


@given(st.lists(st.floats(0.05, 0.3), min_size=3, max_size=3))
def test_mixed_closed_form_against_written_form(zs):
    z = np.array(zs + [1 - sum(zs)])
    if abs(z[3]) < 1e-3:
        return
    g = -3 + 1 / z
    want = 1 + (1 - 2 * z[3] - 3 * z[0] * z[1] - 3 * z[0] * z[2] - 3 * z[1] * z[2]) / (6 * z[0] * z[1] * z[2])
    assert mixed_coefficients(g)[(0, 1, 2)] == pytest.approx(want, rel=1e-9, abs=1e-9)


# ------------------------------------------------------------- Hessians


def test_hessian_classification_examples():
    rep = hessian_classification(np.full(4, 0.25))
    assert rep.status is HessianStatus.ALL_MAX_NONDEGENERATE and rep.regime is Regime.CENTRAL
    rep = hessian_classification([2 / 3, 2 / 3, 2 / 3, -1.0])
    assert rep.status is HessianStatus.ALL_MAX_NONDEGENERATE and rep.regime is Regime.WING
    assert rep.permutation == (0, 1, 2, 3)
    rep = hessian_classification([-1.0, 2 / 3, 2 / 3, 2 / 3])
    assert rep.regime is Regime.WING and rep.permutation == (1, 2, 3, 0)
    with pytest.raises(ValueError):
        # off-diagonal Gramian entries leave (-1/2, 1)
        hessian_classification([0.6, 0.6, -0.1, -0.1])


def test_hessian_all_maxima_in_regimes(rng):
    for _ in range(200):
        rep = hessian_classification(regime_z(rng))
        assert rep.status is HessianStatus.ALL_MAX_NONDEGENERATE


def test_ratio_hessian_finite_differences(rng):
    for _ in range(20):
        z = regime_z(rng)
        if np.min(np.abs(z)) < 0.05:
            continue
        for i in range(4):
            closed = ratio_hessian(z, i)
            numeric = ratio_hessian_numeric(z, i)
            assert np.max(np.abs(closed - numeric)) <= 1e-5 * max(1.0, np.max(np.abs(closed)))


def test_b_from_z_round_trip(rng):
    for _ in range(100):
        b = central_b(rng)
        regime, got, _ = b_from_z((1 - b) / 3)
        assert regime is Regime.CENTRAL and np.allclose(got, b, atol=1e-12)
        b = wing_b(rng)
        regime, got, perm = b_from_z(np.append((1 + b) / 3, -b.sum() / 3))
        assert regime is Regime.WING and np.allclose(got, b, atol=1e-12) and perm[-1] == 3


# ------------------------------------------------------------ pipeline


@pytest.mark.parametrize("seed", range(4))
def test_pipeline_gives_four_global_maxima(seed):
    rng = np.random.default_rng(seed)
    g = gram_central(central_b(rng)) if seed % 2 == 0 else gram_wing(wing_b(rng))
    off = g.matrix[~np.eye(4, dtype=bool)]
    assert np.all(np.arccos(off) < 2 * np.pi / 3)
    p = cubic_from_quadruple(points_from_gram(g)).cubic
    c = critical_points_s2(p)
    assert (c.count(Morse.MAX), c.count(Morse.MIN), c.count(Morse.SADDLE)) == (4, 4, 6)
    top = [m for m in c.global_maxima() if not isinstance(m, CriticalCircle)]
    assert len(top) == 4
    assert c.max_value() == pytest.approx(1.0, abs=1e-10)
    assert brute_force_norm(p, 500) == pytest.approx(1.0, abs=1e-4)
