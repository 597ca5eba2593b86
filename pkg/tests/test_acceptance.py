"""Acceptance criteria 1-10, one test each, every test printing a PASS/FAIL line."""

import time

import numpy as np
import pytest

from cubicball.certificate import extremality_certificate, perturbation_witness, witness_epsilon, witness_points
from cubicball.circle import (
    TAU_MAX,
    FaceFPoint,
    extremal_poly,
    face_F_lmi,
    face_F_membership,
    face_F_membership_lmi,
    norm_s1,
)
from cubicball.classify import Verdict, classify_s2
from cubicball.families import (
    SQRT6,
    Form,
    case_a,
    case_b,
    case_c,
    case_c_axis,
    case_d,
    case_f,
    fourth_maximum,
    nondeg_maxima,
    sample_form,
)
from cubicball.gramian import gram_central, gram_from_z, gram_wing, linear_system, linear_system_determinant
from cubicball.poly import Cubic3, apply_orthogonal, random_orthogonal, tangent_hessian
from cubicball.sphere import CriticalCircle, CriticalPoint, Degeneracy, Morse, brute_force_norm, critical_points_s2, norm_s2


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail

    return emit


def angles_max(p, count):
    t = np.linspace(0, 2 * np.pi, count, endpoint=False)
    return float(np.max(p(np.column_stack([np.cos(t), np.sin(t)]))))


def gap(a, b):
    d = (a - b) % (2 * np.pi)
    return min(d, 2 * np.pi - d)


def test_criterion_01_circle_family(report):
    norm_err, sep_err = 0.0, 0.0
    for tau in np.linspace(-TAU_MAX, TAU_MAX, 200):
        p = extremal_poly(tau)
        norm_err = max(norm_err, abs(angles_max(p, 10**6) - 1.0))
        # arccos loses precision for tiny tau, so the separation check stays away from 0
        if 1e-3 < tau < TAU_MAX:
            arg = norm_s1(p)[1]
            top = sorted(arg, key=lambda a: -p(np.array([np.cos(a), np.sin(a)])))[:2]
            want = np.arccos((1 - 4 * tau**2) / (1 + 4 * tau**2))
            sep_err = max(sep_err, abs(gap(*top) - want))
    report(1, norm_err <= 1e-9 and sep_err <= 1e-8, f"norm error {norm_err:.2e}, separation error {sep_err:.2e}")


def test_criterion_02_face_dual_description(report):
    rng = np.random.default_rng(2)
    pts = np.column_stack([rng.uniform(-1.5, 1.0, 10**4), rng.uniform(-1.5, 1.5, 10**4)])
    disagree = sum(face_F_membership(FaceFPoint(a, b)) != face_F_membership_lmi(FaceFPoint(a, b)) for a, b in pts)
    a = rng.uniform(-1.0, 0.5, 1000)
    b = np.sqrt(np.maximum(0.0, 1 - 2 * a**3 - 3 * a**2)) * rng.choice([-1, 1], 1000)
    ident = 0.0
    for x, y in zip(a, b):
        lhs = np.linalg.det(face_F_lmi(FaceFPoint(x, y)))
        ident = max(ident, abs(lhs - 4 * (1 - 2 * x**3 - 3 * x**2 - y**2)), abs(lhs))
    report(2, disagree == 0 and ident <= 1e-10, f"{disagree} disagreements in 10^4, determinant identity error {ident:.2e}")


def test_criterion_03_quartic_order(report):
    p = extremal_poly(0.0)
    phi = np.linspace(-0.05, 0.05, 201)
    y = 1 - p(np.column_stack([np.cos(phi), np.sin(phi)]))
    c4, _ = np.linalg.lstsq(np.column_stack([phi**4, phi**6]), y, rcond=None)[0]
    report(3, abs(c4 - 3 / 8) <= 1e-4, f"fitted quartic coefficient {c4:.8f}")


def test_criterion_04_three_maxima_pipeline(report):
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    bad = []
    for _ in range(100):
        x, y = sample_form(Form.B, rng).params
        p = case_b(x, y)
        c = critical_points_s2(p)
        maxima = c.global_maxima()
        pts = [m for m in maxima if isinstance(m, CriticalPoint)]
        ok = c.complete and len(maxima) == 4 and len(pts) == 4
        ok = ok and all(abs(m.value - 1.0) <= 1e-9 for m in pts)
        ok = ok and min(np.linalg.norm(m.location - fourth_maximum(x, y)) for m in pts) <= 1e-9
        ok = ok and extremality_certificate(p, maxima, verify_grid=0).rank == 10
        if not ok:
            bad.append((x, y))
    elapsed = time.perf_counter() - start
    report(4, not bad and elapsed <= 120, f"{100 - len(bad)}/100 correct in {elapsed:.1f}s; failures {bad[:3]}")


def test_criterion_05_double_maximum_family(report):
    rng = np.random.default_rng(5)
    err = {"unit": 0.0, "value": 0.0, "circle": 0.0}
    for _ in range(100):
        x, xi = rng.uniform(-0.99, 0.49), rng.uniform(0.0, np.pi / 2)
        p, s = case_f(x, xi), np.sqrt(1 - 2 * x)
        for u, sign in zip(nondeg_maxima(x, xi), (1.0, -1.0)):
            err["unit"] = max(err["unit"], abs(np.linalg.norm(u) - 1))
            err["value"] = max(err["value"], abs(p(u) - 1))
            err["circle"] = max(err["circle"], abs(u[0] + sign * s * u[2] - 1))
    xp, xm = nondeg_maxima(0.0, 0.0)
    exact = max(np.max(np.abs(xp - np.array([1, SQRT6, 3]) / 4)), np.max(np.abs(xm - np.array([1, SQRT6, -3]) / 4)))
    ok = err["unit"] <= 1e-12 and err["value"] <= 1e-10 and err["circle"] <= 1e-10 and exact <= 1e-12
    report(5, ok, ", ".join(f"{k} {v:.2e}" for k, v in err.items()) + f", closed form at 0 {exact:.2e}")


def test_criterion_06_gramian_identities(report):
    rng = np.random.default_rng(6)
    coef, kern, psd, det = 0.0, 0.0, True, 0.0
    for _ in range(1000):
        for g in (gram_central(rng.dirichlet(np.ones(4))), gram_wing(rng.uniform(0.01, 5.0, 3))):
            coef = max(coef, np.max(np.abs(g.matrix - gram_from_z(g.z).matrix)))
            kern = max(kern, g.kernel_residual())
            w = g.eigenvalues()
            psd = psd and abs(w[0]) <= 1e-10 and w[1] > 1e-10 and np.linalg.matrix_rank(g.matrix, 1e-9) == 3
    for _ in range(100):
        z = rng.uniform(-1.0, 1.0, 4)
        z[3] = 1.0 - z[:3].sum()
        want = linear_system_determinant(z)
        det = max(det, abs(np.linalg.det(linear_system(z)[0]) - want) / abs(want))
        assert want == pytest.approx(-12 * np.prod(z**2) * z.sum() ** 2, rel=1e-15)
    ok = coef <= 1e-12 and kern <= 1e-10 and psd and det <= 1e-8
    report(6, ok, f"coefficient error {coef:.2e}, kernel {kern:.2e}, rank 3 PSD {psd}, determinant relative {det:.2e}")


def test_criterion_07_morse_census(report):
    rng = np.random.default_rng(7)
    bad = []
    for case in (Form.G, Form.H):
        for _ in range(50):
            form = sample_form(case, rng)
            c = critical_points_s2(form.cubic())
            counts = (c.count(Morse.MAX), c.count(Morse.MIN), c.count(Morse.SADDLE))
            if counts != (4, 4, 6) or c.euler != 2 or c.circles:
                bad.append((case.value, form.params, counts))
    report(7, not bad, f"{100 - len(bad)}/100 with census 4/4/6 and index sum 2; failures {bad[:3]}")


def test_criterion_08_zonal_checks(report):
    spread = 0.0
    axis, off = case_c_axis(0.2)
    closed = [(case_a(), -np.eye(3)[0], 0.5), (case_c(0.2), axis, off), (case_c(-0.7), *case_c_axis(-0.7))]
    for p, normal, offset in closed:
        circ = CriticalCircle(np.asarray(normal, dtype=float), float(offset), 1.0, Morse.MAX)
        spread = max(spread, np.ptp(p(circ.samples(1000))), np.max(np.abs(p(circ.samples(1000)) - 1.0)))
        found = [m for m in norm_s2(p)[1] if isinstance(m, CriticalCircle)]
        spread = max(spread, np.ptp(p(found[0].samples(1000))))
    hess = np.linalg.norm(tangent_hessian(case_d(), np.eye(3)[0]))
    report(8, spread <= 1e-10 and hess <= 1e-10, f"circle spread {spread:.2e}, flat Hessian norm {hess:.2e}")


def test_criterion_09_classifier_round_trip(report):
    rng = np.random.default_rng(9)
    start = time.perf_counter()
    bad = []
    for case in Form:
        for _ in range(50):
            form = sample_form(case, rng)
            p = apply_orthogonal(form.cubic(), random_orthogonal(rng))
            r = classify_s2(p)
            ok = r.verdict is Verdict.EXTREMAL and r.form.case is case
            if not ok or not np.allclose(r.form.params, form.params, atol=1e-6, rtol=0):
                bad.append((case.value, form.params, r.verdict.value, r.form and r.form.params))
    elapsed = time.perf_counter() - start
    report(9, not bad and elapsed <= 600, f"{400 - len(bad)}/400 recovered in {elapsed:.1f}s; failures {bad[:3]}")


def non_extremal_samples(rng):
    out = []
    for _ in range(14):
        p = Cubic3(rng.standard_normal(10))
        out.append(p * (1.0 / norm_s2(p)[0]))
    base = [
        Cubic3.from_monomials({"300": 1.0, "120": 1.0, "102": 1.0}),
        Cubic3.from_monomials({"300": 1.0, "120": -3.0}),
        Cubic3.from_monomials({"300": 1.0, "030": 1.0}),
    ]
    lifted = extremal_poly(0.5)
    base.append(Cubic3.from_monomials({"300": lifted.p30, "210": 3 * lifted.p21, "120": 3 * lifted.p12, "030": lifted.p03}))
    for p in base:
        out.append(p * (1.0 / norm_s2(p)[0]))
    for p in base[:2]:
        out.append(apply_orthogonal(p, random_orthogonal(rng)))
    return out


def test_criterion_10_non_extremality(report):
    rng = np.random.default_rng(10)
    samples = non_extremal_samples(rng)
    assert len(samples) == 20
    worst, bad = np.inf, []
    for i, p in enumerate(samples):
        maxima = norm_s2(p)[1]
        assert 1 <= len(maxima) <= 3
        assert all(isinstance(m, CriticalPoint) and m.degeneracy is Degeneracy.NON_DEGENERATE for m in maxima)
        delta = perturbation_witness(*witness_points([m.location for m in maxima]))
        eps = witness_epsilon(p, delta)
        grid = max(brute_force_norm(p + delta * (s * eps), 500) for s in (1, -1))
        worst = min(worst, eps)
        if eps < 1e-6 or grid > 1.0 + 1e-12:
            bad.append((i, eps, grid))
    report(10, not bad, f"smallest epsilon {worst:.3g} over 20 cubics; failures {bad[:3]}")
