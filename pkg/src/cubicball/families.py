"""Constructors and face tests for the canonical boundary forms A to H on S^2.

Every constructor returns the representative with a maximum at e1 and the
"+" sign branch; mirrored versions come from ``apply_orthogonal`` with
``diag(1, 1, -1)`` or ``diag(1, -1, 1)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .poly import Cubic3, make_zonal

SQRT3 = np.sqrt(3.0)
SQRT6 = np.sqrt(6.0)
E1 = np.array([1.0, 0.0, 0.0])


class FaceStatus(enum.Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    OUTSIDE = "Outside"


def _open_unit_range(p102: float) -> None:
    if not -1.0 < p102 < 0.5:
        raise ValueError(f"p102 must lie in (-1, 1/2), got {p102}")


# ------------------------------------------------------------------ case (a)


def case_a() -> Cubic3:
    """Zonal cubic with a maximum at e1 and a circle of maxima at x1 = -1/2."""
    return Cubic3.from_monomials({"300": 1.0, "120": -3.0, "102": -3.0})


# --------------------------------------------------- three maxima on a circle


@dataclass(frozen=True)
class F3Point:
    p102: float
    p012: float
    p003: float

    def factors(self) -> tuple[float, float, float]:
        return (
            1.0 + self.p102 + SQRT3 * self.p012,
            1.0 + self.p102 - SQRT3 * self.p012,
            1.0 - 2.0 * self.p102,
        )

    def cubic(self) -> Cubic3:
        return Cubic3.from_monomials(
            {"300": 1.0, "120": -3.0, "102": 3.0 * self.p102, "012": 3.0 * self.p012, "003": self.p003}
        )


def face_F3_membership(q: F3Point, tol: float = 1e-12) -> tuple[FaceStatus, bool]:
    """Status in the face of cubics sharing three equally spaced maxima, plus the
    extremality flag: determinant condition tight and either all three or exactly
    one of the linear factors strictly positive."""
    t = q.factors()
    det = t[0] * t[1] * t[2] - q.p003**2
    if min(t) < -tol or det < -tol:
        return FaceStatus.OUTSIDE, False
    strict = sum(1 for f in t if f > tol)
    tight = abs(det) <= tol
    status = FaceStatus.BOUNDARY if (tight or strict < 3) else FaceStatus.INTERIOR
    extremal = tight and strict in (1, 3)
    return status, extremal


def _check_triangle(p102: float, p012: float, strict: bool = False, tol: float = 1e-12) -> None:
    if not p102 < 0.5:
        raise ValueError(f"p102 must be below 1/2, got {p102}")
    if strict:
        ok = 0.0 < p012 < SQRT3 * p102 or (p012 == 0.0 and p102 >= 0.0)
        ok = ok and (1.0 + p102) ** 2 - 3.0 * p012**2 > 0.0
    else:
        ok = -tol <= p012 <= SQRT3 * p102 + tol
    if not ok:
        raise ValueError(f"({p102}, {p012}) lies outside the triangle 0 <= p012 <= sqrt(3) p102")


def case_b_p003(p102: float, p012: float) -> float:
    return float(np.sqrt(((1.0 + p102) ** 2 - 3.0 * p012**2) * (1.0 - 2.0 * p102)))


def case_b(p102: float, p012: float) -> Cubic3:
    """Cubic with three equally spaced maxima on the (e1, e2) great circle and a fourth off it."""
    _check_triangle(p102, p012)
    return F3Point(p102, p012, case_b_p003(p102, p012)).cubic()


def fourth_maximum(p102: float, p012: float) -> np.ndarray:
    """The maximum of ``case_b`` off the (e1, e2) plane, with positive last entry."""
    _check_triangle(p102, p012)
    den = 1.0 - p102**2 - p012**2
    if den <= 0.0 or (1.0 + p102) ** 2 - 3.0 * p012**2 <= 0.0:
        raise ValueError("parameters on the triangle boundary have no separate fourth maximum")
    x1 = (p102 + p102**2 - p012**2) / den
    x2 = p012 * (1.0 - 2.0 * p102) / den
    x3 = np.sqrt((1.0 - 2.0 * p102) * ((1.0 + p102) ** 2 - 3.0 * p012**2)) / den
    return np.array([x1, x2, x3])


TRIANGLE_P = np.array([[-1.0, 0.5, 0.5], [0.0, -SQRT3 / 2, SQRT3 / 2]])
TRIANGLE_X = np.array([[1.0, -0.5, -0.5], [0.0, SQRT3 / 2, -SQRT3 / 2]])


def barycentric_map(p102: float, p012: float) -> np.ndarray:
    """Planar part of the fourth maximum via barycentric coordinates:
    weights ``lam`` on the coefficient triangle map to weights proportional to
    ``1/lam`` on the triangle of maxima."""
    lam = np.linalg.solve(np.vstack([TRIANGLE_P, np.ones(3)]), np.array([p102, p012, 1.0]))
    if np.any(lam <= 0):
        raise ValueError("point is not interior to the coefficient triangle")
    mu = (1.0 / lam) / np.sum(1.0 / lam)
    return TRIANGLE_X @ mu


def case_b_maxima(p102: float, p012: float) -> np.ndarray:
    return np.array(
        [E1, [-0.5, SQRT3 / 2, 0.0], [-0.5, -SQRT3 / 2, 0.0], fourth_maximum(p102, p012)]
    )


# -------------------------------------------------------- degenerate maxima


def case_c(p102: float) -> Cubic3:
    """Zonal cubic whose maxima fill the circle ``x1 + sqrt(1 - 2 p102) x3 = 1``."""
    _open_unit_range(p102)
    s = np.sqrt(1.0 - 2.0 * p102)
    return Cubic3.from_monomials(
        {"300": 1.0, "120": 1.5, "102": 3.0 * p102, "021": 1.5 * s, "003": (1.0 + p102) * s}
    )


def case_c_axis(p102: float) -> tuple[np.ndarray, float]:
    """Unit axis and plane offset of the circle of maxima of ``case_c``."""
    s = np.sqrt(1.0 - 2.0 * p102)
    length = np.sqrt(1.0 + s * s)
    return np.array([1.0, 0.0, s]) / length, 1.0 / length


def case_c_zonal(p102: float) -> Cubic3:
    """Same cubic as ``case_c`` built as ``-(1/2) l^3 + (3/2) l |x|^2`` in the axis functional ``l``."""
    axis, off = case_c_axis(p102)
    length = 1.0 / off
    return make_zonal(axis, 1.5 * length, -0.5 * length**3)


def case_d() -> Cubic3:
    """Zonal cubic with a single flat maximum at e1."""
    return Cubic3.from_monomials({"300": 1.0, "120": 1.5, "102": 1.5})


def case_e(p102: float) -> Cubic3:
    """Triply degenerate maximum at e1 plus one non-degenerate maximum."""
    _open_unit_range(p102)
    s = np.sqrt(1.0 - 2.0 * p102)
    return Cubic3.from_monomials(
        {"300": 1.0, "120": 1.5, "102": 3.0 * p102, "021": -1.5 * s, "003": (1.0 + p102) * s}
    )


def case_e_maximum(p102: float) -> np.ndarray:
    _open_unit_range(p102)
    return np.array([p102, 0.0, np.sqrt(1.0 - 2.0 * p102)]) / (1.0 - p102)


def case_f_general(p102: float, xi: float) -> Cubic3:
    """The one-parameter family through ``case_e`` for any angle ``xi``."""
    _open_unit_range(p102)
    s = np.sqrt(1.0 - 2.0 * p102)
    return Cubic3.from_monomials(
        {
            "300": 1.0,
            "120": 1.5,
            "102": 3.0 * p102,
            "021": -1.5 * s * np.sin(xi),
            "012": s * SQRT6 * np.sqrt(1.0 + p102) * np.cos(xi),
            "003": s * (1.0 + p102) * np.sin(xi),
        }
    )


def case_f(p102: float, xi: float) -> Cubic3:
    """Doubly degenerate maximum at e1 plus two non-degenerate maxima."""
    if not 0.0 <= xi < np.pi / 2:
        raise ValueError(f"xi must lie in [0, pi/2), got {xi}")
    return case_f_general(p102, xi)


def nondeg_maxima(p102: float, xi: float) -> tuple[np.ndarray, np.ndarray]:
    """The two non-degenerate maxima ``(x+, x-)`` of ``case_f_general``."""
    _open_unit_range(p102)
    s2 = 1.0 - 2.0 * p102
    out = []
    for sign in (1.0, -1.0):
        den = 2.0 * (2.0 - p102 + sign * s2 * np.sin(xi))
        vec = np.array(
            [
                1.0 + 4.0 * p102 - sign * s2 * np.sin(xi),
                np.sqrt(6.0 * s2 * (1.0 + p102)) * np.cos(xi),
                3.0 * np.sqrt(s2) * (sign + np.sin(xi)),
            ]
        )
        out.append(vec / den)
    return out[0], out[1]


@dataclass(frozen=True)
class F4Point:
    p102: float
    p021: float
    p012: float
    p003: float

    def matrices(self) -> tuple[np.ndarray, np.ndarray]:
        base = np.sqrt(max(0.0, 1.0 - 2.0 * self.p102)) * np.diag([3.0, 2.0 * (1.0 + self.p102)])
        off = np.array([[6.0 * self.p021, 3.0 * self.p012], [3.0 * self.p012, 2.0 * self.p003]])
        return base + off, base - off


def face_F4_membership(q: F4Point, tol: float = 1e-12) -> FaceStatus:
    if not -1.0 - tol <= q.p102 <= 0.5 + tol:
        raise ValueError(f"p102 must lie in [-1, 1/2], got {q.p102}")
    lo = min(np.min(np.linalg.eigvalsh(m)) for m in q.matrices())
    if lo > tol:
        return FaceStatus.INTERIOR
    if lo >= -tol:
        return FaceStatus.BOUNDARY
    return FaceStatus.OUTSIDE


# ---------------------------------------------------------- canonical forms


class Form(enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"
    F = "F"
    G = "G"
    H = "H"


PARAM_NAMES = {
    Form.A: (),
    Form.B: ("p102", "p012"),
    Form.C: ("p102",),
    Form.D: (),
    Form.E: ("p102",),
    Form.F: ("p102", "xi"),
    Form.G: ("b1", "b2", "b3", "b4"),
    Form.H: ("b1", "b2", "b3"),
}


@dataclass(frozen=True)
class CanonicalForm:
    case: Form
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.params) != len(PARAM_NAMES[self.case]):
            raise ValueError(f"form {self.case.value} takes parameters {PARAM_NAMES[self.case]}")

    def named_params(self) -> dict[str, float]:
        return dict(zip(PARAM_NAMES[self.case], (float(v) for v in self.params)))

    def cubic(self) -> Cubic3:
        c, a = self.case, self.params
        if c is Form.A:
            return case_a()
        if c is Form.B:
            return case_b(*a)
        if c is Form.C:
            return case_c(*a)
        if c is Form.D:
            return case_d()
        if c is Form.E:
            return case_e(*a)
        if c is Form.F:
            return case_f(*a)
        from .gramian import cubic_from_quadruple, gram_central, gram_wing, points_from_gram

        gram = gram_central(np.array(a)) if c is Form.G else gram_wing(np.array(a))
        return cubic_from_quadruple(points_from_gram(gram)).cubic

    def maxima(self) -> tuple[list[np.ndarray], list[tuple[np.ndarray, float]]]:
        """Known global maxima of the representative: points and circles ``(normal, offset)``."""
        c, a = self.case, self.params
        if c is Form.A:
            return [E1.copy()], [(-E1.copy(), 0.5)]
        if c is Form.B:
            return list(case_b_maxima(*a)), []
        if c is Form.C:
            axis, off = case_c_axis(*a)
            return [], [(axis, off)]
        if c is Form.D:
            return [E1.copy()], []
        if c is Form.E:
            return [E1.copy(), case_e_maximum(*a)], []
        if c is Form.F:
            xp, xm = nondeg_maxima(*a)
            return [E1.copy(), xp, xm], []
        from .gramian import gram_central, gram_wing, points_from_gram

        gram = gram_central(np.array(a)) if c is Form.G else gram_wing(np.array(a))
        return list(points_from_gram(gram)), []


def construct(family: str, **params: float) -> Cubic3:
    """Build a family member by letter, e.g. ``construct("b", p102=0.2, p012=0.1)``."""
    fam = family.lower()
    table = {
        "a": (case_a, ()),
        "b": (case_b, ("p102", "p012")),
        "c": (case_c, ("p102",)),
        "d": (case_d, ()),
        "e": (case_e, ("p102",)),
        "f": (case_f, ("p102", "xi")),
    }
    if fam not in table:
        raise ValueError(f"unknown family {family!r}; expected one of a-f")
    fn, names = table[fam]
    missing = [n for n in names if n not in params]
    extra = [k for k in params if k not in names]
    if missing or extra:
        raise ValueError(f"family {fam} takes parameters {names}; missing {missing}, unexpected {extra}")
    return fn(*(float(params[n]) for n in names))


def sample_form(case: Form, rng: np.random.Generator) -> CanonicalForm:
    """Random member of a family, kept a little away from the edges of its domain."""
    if case is Form.B:
        while True:
            x, y = rng.uniform(0.0, 0.5), rng.uniform(0.0, SQRT3 * 0.5)
            if 1e-3 < y < SQRT3 * x - 1e-3 and x < 0.499:
                return CanonicalForm(case, (float(x), float(y)))
    if case in (Form.C, Form.E):
        return CanonicalForm(case, (float(rng.uniform(-0.99, 0.49)),))
    if case is Form.F:
        return CanonicalForm(case, (float(rng.uniform(-0.99, 0.49)), float(rng.uniform(0.0, np.pi / 2 - 1e-2))))
    if case is Form.G:
        return CanonicalForm(case, tuple(float(v) for v in np.sort(rng.dirichlet(np.ones(4)))))
    if case is Form.H:
        return CanonicalForm(case, tuple(float(v) for v in np.sort(rng.uniform(0.05, 3.0, 3))))
    return CanonicalForm(case)
