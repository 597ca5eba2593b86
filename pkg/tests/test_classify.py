import numpy as np
import pytest

from cubicball.certificate import non_extremality_witness
from cubicball.classify import EXTREMAL_RESIDUAL, Verdict, classify_s2, manifold_probe, polish, representative
from cubicball.families import CanonicalForm, Form, case_a, sample_form
from cubicball.poly import Cubic3, apply_orthogonal, random_orthogonal
from cubicball.sphere import brute_force_norm, norm_s2


def rotated(form, seed):
    q = random_orthogonal(np.random.default_rng(seed))
    return apply_orthogonal(form.cubic(), q), q


def test_rotated_case_a():
    p, q = rotated(CanonicalForm(Form.A), 1)
    r = classify_s2(p)
    assert r.verdict is Verdict.EXTREMAL and r.form.case is Form.A
    assert r.residual <= 1e-9
    assert apply_orthogonal(r.form.cubic(), r.transform).allclose(p, 1e-9)


def test_central_gramian_cubic():
    form = CanonicalForm(Form.G, (0.1, 0.2, 0.3, 0.4))
    r = classify_s2(rotated(form, 2)[0])
    assert r.verdict is Verdict.EXTREMAL and r.form.case is Form.G
    assert np.allclose(r.form.params, form.params, atol=1e-7)


def test_single_maximum_is_not_extremal():
    p = Cubic3.from_monomials({"300": 1.0, "120": 1.0, "102": 1.0})
    r = classify_s2(p)
    assert r.verdict is Verdict.NOT_EXTREMAL and r.form is None
    assert r.certificate.rank < 10
    delta, eps = non_extremality_witness(p, norm_s2(p)[1], r.certificate)
    assert eps >= 1e-6
    for s in (1, -1):
        assert brute_force_norm(p + delta * (s * eps), 500) <= 1.0 + 1e-12


def test_rejects_cubic_off_the_sphere():
    with pytest.raises(ValueError):
        classify_s2(case_a() * 1.5)
    with pytest.raises(ValueError):
        classify_s2(case_a() * 0.5)


@pytest.mark.parametrize("case", list(Form), ids=lambda f: f.value)
def test_round_trip_and_exclusivity(case):
    rng = np.random.default_rng(17)
    for _ in range(3):
        form = sample_form(case, rng)
        p = apply_orthogonal(form.cubic(), random_orthogonal(rng))
        r = classify_s2(p)
        assert r.verdict is Verdict.EXTREMAL and r.form.case is case
        assert np.allclose(r.form.params, form.params, atol=1e-6)
        assert r.certificate.rank == 10 and r.residual <= EXTREMAL_RESIDUAL
        assert apply_orthogonal(r.form.cubic(), r.transform).allclose(p, 1e-7)
        assert np.allclose(r.transform.T @ r.transform, np.eye(3), atol=1e-12)
        # every other form tried in the branch fits clearly worse, except the limit
        # forms: A closes the C family and E closes the F family
        for name, res in r.candidates.items():
            limit = (case, name) in ((Form.A, "C"), (Form.F, "E"))
            if name != case.value and not limit:
                assert res > 1e-3


def test_to_dict_fields():
    r = classify_s2(CanonicalForm(Form.C, (0.2,)).cubic())
    d = r.to_dict()
    assert d["verdict"] == "Extremal" and d["form"] == "C"
    assert d["params"]["p102"] == pytest.approx(0.2, abs=1e-9)
    assert d["certificate_rank"] == 10


def test_polish_recovers_perturbed_start():
    form = CanonicalForm(Form.F, (0.1, 0.6))
    p, q = rotated(form, 4)
    params, q2, res = polish(p, Form.F, (0.12, 0.58), q)
    assert res <= 1e-12 and np.allclose(params, form.params, atol=1e-10)


def test_representative_matches_canonical_inside_domain():
    for form in (CanonicalForm(Form.B, (0.2, 0.1)), CanonicalForm(Form.E, (-0.3,)), CanonicalForm(Form.H, (0.5, 1.0, 2.0))):
        assert representative(form.case, form.params).allclose(form.cubic(), 1e-9)


def test_manifold_probe_distances_shrink():
    results = manifold_probe()
    assert [r.pair for r in results] == [("c", "d"), ("c", "a"), ("g", "b"), ("h", "b"), ("g", "vertex")]
    for r in results:
        assert r.converged, r.pair
        assert r.distances[-1] < r.distances[0]
    with pytest.raises(ValueError):
        manifold_probe([("a", "z")])
