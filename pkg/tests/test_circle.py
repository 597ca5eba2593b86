import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from strategies import cubic2

from cubicball.circle import (
    TAU_MAX,
    FaceFPoint,
    Membership,
    S1Class,
    classify_s1,
    extremal_poly,
    face_F_lmi,
    face_F_membership,
    face_F_membership_lmi,
    maxima_angle,
    membership_s1,
    norm_s1,
)
from cubicball.poly import Cubic2, apply_orthogonal, rotation2
from cubicball.trig import TrigPoly, certified_minimum


def brute_s1(p, count=10**6):
    t = np.linspace(0, 2 * np.pi, count, endpoint=False)
    return float(np.max(p(np.column_stack([np.cos(t), np.sin(t)]))))


def gap(a, b):
    d = (a - b) % (2 * np.pi)
    return min(d, 2 * np.pi - d)


# ------------------------------------------------------------------ trig


def test_trig_arithmetic_and_evaluation():
    c, s = TrigPoly.cos(), TrigPoly.sin()
    one = c**2 + s**2
    t = np.linspace(0, 6, 7)
    assert np.allclose(one(t), 1.0, atol=1e-15)
    assert np.allclose((c * s * 2.0)(t), np.sin(2 * t), atol=1e-15)
    assert np.allclose(c.derivative()(t), -np.sin(t), atol=1e-15)
    assert (1.0 - c)(0.0) == pytest.approx(0.0, abs=1e-15)


def test_trig_rejects_even_length():
    with pytest.raises(ValueError):
        TrigPoly(np.zeros(2))


def test_certified_minimum_known_polynomial():
    s = TrigPoly.cos() ** 3 - TrigPoly.cos() * 0.5
    got = certified_minimum(s)
    t = np.linspace(0, 2 * np.pi, 200001)
    assert got.value == pytest.approx(np.min(s(t)), abs=1e-9)
    assert got.lower_bound <= got.value


@given(st.lists(st.floats(-1, 1), min_size=7, max_size=7))
def test_certified_lower_bound_is_valid(c):
    coeffs = np.array(c[:3][::-1] + [c[3]] + c[:3], dtype=complex) + 1j * np.array(
        [-c[4], -c[5], -c[6], 0.0, c[6], c[5], c[4]]
    )
    s = TrigPoly(coeffs)
    m = certified_minimum(s)
    t = np.linspace(0, 2 * np.pi, 20001)
    assert m.lower_bound <= np.min(s(t)) + 1e-12
    assert m.value <= np.min(s(t)) + 1e-9


# ------------------------------------------------------------------ norm


def test_norm_x1_cubed():
    val, arg = norm_s1(Cubic2.from_scaled(1, 0, 0, 0))
    assert val == pytest.approx(1.0, abs=1e-15) and np.allclose(arg, [0.0])


def test_norm_three_maxima():
    val, arg = norm_s1(Cubic2.from_scaled(1, 0, -1, 0))
    assert val == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(sorted(arg), [-2 * np.pi / 3, 0.0, 2 * np.pi / 3], atol=1e-9)


def test_norm_homogeneity():
    assert norm_s1(Cubic2.from_scaled(2, 0, 0, 0))[0] == pytest.approx(2.0)


def test_norm_zero():
    assert norm_s1(Cubic2.zero()) == (0.0, [])


def test_norm_rejects_wrong_type():
    with pytest.raises(TypeError):
        norm_s1(np.zeros(4))


def test_norm_against_brute_force(rng):
    for _ in range(100):
        p = Cubic2(rng.standard_normal(4))
        assert norm_s1(p)[0] == pytest.approx(brute_s1(p, 200000), abs=1e-9 + 5e-9 * np.abs(p.coeffs).max())


@given(cubic2())
def test_norm_is_attained_and_maximal(p):
    val, arg = norm_s1(p)
    if not np.any(p.coeffs):
        return
    for a in arg:
        assert p(np.array([np.cos(a), np.sin(a)])) == pytest.approx(val, abs=1e-9 * max(1, abs(val)))
    assert val >= brute_s1(p, 20000) - 1e-12


# ------------------------------------------------------------ membership


def test_membership_examples():
    assert membership_s1(Cubic2.from_scaled(0.5, 0, 0, 0)) is Membership.INSIDE
    assert membership_s1(Cubic2.from_scaled(1, 0, 0.5, 0)) is Membership.BOUNDARY
    assert membership_s1(Cubic2.from_scaled(1, 0, 1, 0)) is Membership.OUTSIDE
    with pytest.raises(ValueError):
        membership_s1(Cubic2.from_scaled(1, 0, 0, 0), tol=0.0)


def test_outside_example_confirmed_by_grid():
    assert brute_s1(Cubic2.from_scaled(1, 0, 1, 0), 10**5) > 1.0


# ------------------------------------------------------------------- face


def test_face_examples():
    assert face_F_membership(FaceFPoint(0.0, 0.0)) and face_F_membership_lmi(FaceFPoint(0.0, 0.0))
    q = FaceFPoint(0.5, 0.0)
    assert face_F_membership(q) and face_F_membership_lmi(q)
    assert abs(np.linalg.det(face_F_lmi(q))) <= 1e-12
    q = FaceFPoint(0.6, 0.0)
    assert not face_F_membership(q) and not face_F_membership_lmi(q)


@given(st.floats(-1.5, 1.0), st.floats(-1.5, 1.5))
def test_face_scalar_and_lmi_agree(a, b):
    q = FaceFPoint(a, b)
    margin = (1 - 2 * a) * (1 + a) ** 2 - b * b
    if abs(margin) < 1e-9 or abs(a + 1) < 1e-9:
        return
    assert face_F_membership(q) == face_F_membership_lmi(q)


def test_face_members_are_in_the_ball(rng):
    for _ in range(200):
        a, b = rng.uniform(-1, 0.5), rng.uniform(-1.5, 1.5)
        q = FaceFPoint(a, b)
        inside = face_F_membership(q)
        assert inside == (norm_s1(q.cubic())[0] <= 1 + 1e-9)


# ------------------------------------------------------------- family


def test_extremal_poly_examples():
    assert extremal_poly(0.0).allclose(Cubic2.from_scaled(1, 0, 0.5, 0))
    assert extremal_poly(TAU_MAX).allclose(Cubic2.from_scaled(1, 0, -1, 0), 1e-15)
    p = extremal_poly(0.5)
    assert p.allclose(Cubic2.from_scaled(1, 0, 0, 1), 1e-15)
    val, arg = norm_s1(p)
    assert val == pytest.approx(1.0) and gap(arg[0], arg[1]) == pytest.approx(np.pi / 2, abs=1e-9)
    with pytest.raises(ValueError):
        extremal_poly(0.9)


def test_maxima_angle_examples():
    assert maxima_angle(0.5) == pytest.approx(np.pi / 2)
    assert maxima_angle(1e-9) == pytest.approx(0.0, abs=1e-8)
    assert maxima_angle(TAU_MAX - 1e-9) == pytest.approx(2 * np.pi / 3, abs=1e-6)


# arccos near 1 loses relative precision, so tiny nonzero tau is skipped
@given(st.just(0.0) | st.floats(1e-3, TAU_MAX) | st.floats(-TAU_MAX, -1e-3))
def test_extremal_poly_reflection_invariance(tau):
    # reflection across the bisector of the two maxima
    phi = maxima_angle(tau) if tau != 0 else 0.0
    a = phi / 2
    refl = np.array([[np.cos(2 * a), np.sin(2 * a)], [np.sin(2 * a), -np.cos(2 * a)]])
    p = extremal_poly(tau)
    assert apply_orthogonal(p, refl).allclose(p, 1e-12)


def test_quartic_flatness_at_zero():
    p = extremal_poly(0.0)
    phi = np.linspace(-0.05, 0.05, 201)
    y = 1 - p(np.column_stack([np.cos(phi), np.sin(phi)]))
    c4, c6 = np.linalg.lstsq(np.column_stack([phi**4, phi**6]), y, rcond=None)[0]
    assert c4 == pytest.approx(3 / 8, abs=1e-4)


# ---------------------------------------------------------- classification


def test_classify_examples():
    assert classify_s1(Cubic2.from_scaled(0.9, 0, 0, 0)).kind is S1Class.INTERIOR
    r = classify_s1(Cubic2.from_scaled(1, 0, 1 / 3, 0))
    assert r.kind is S1Class.FACE_INTERIOR
    r = classify_s1(apply_orthogonal(extremal_poly(0.5), rotation2(0.7)))
    assert r.kind is S1Class.TWO_MAXIMA
    assert r.rotation_angle == pytest.approx(0.7, abs=1e-8) and abs(r.tau) == pytest.approx(0.5, abs=1e-8)
    with pytest.raises(ValueError):
        classify_s1(Cubic2.from_scaled(2, 0, 0, 0))


def test_classify_degenerate_and_three():
    r = classify_s1(apply_orthogonal(extremal_poly(0.0), rotation2(-1.1)))
    assert r.kind is S1Class.SINGLE_DEGENERATE and r.tau == 0.0
    r = classify_s1(apply_orthogonal(extremal_poly(TAU_MAX), rotation2(0.2)))
    assert r.kind is S1Class.THREE_MAXIMA and r.tau == pytest.approx(TAU_MAX)


def test_classify_round_trip(rng):
    for _ in range(100):
        tau = rng.uniform(1e-3, TAU_MAX - 1e-3) * rng.choice([-1, 1])
        phi = rng.uniform(-np.pi, np.pi)
        r = classify_s1(apply_orthogonal(extremal_poly(tau), rotation2(phi)))
        assert r.kind is S1Class.TWO_MAXIMA
        # the normal form is taken at the first maximum; tau is defined up to sign
        assert abs(r.tau) == pytest.approx(abs(tau), abs=1e-8)
        assert len(r.maxima) == 2
        assert gap(*r.maxima) <= 2 * np.pi / 3 + 1e-9
