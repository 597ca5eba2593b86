"""Binary cubics on the unit circle: norm, the face through a fixed maximum, and
the extremal one-parameter family."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .poly import Cubic2, angular_derivative, apply_orthogonal, rotation2

ARGMAX_DEDUP = 1e-7
VALUE_TOL = 1e-10
BOUNDARY_TOL = 1e-9
TAU_MAX = np.sqrt(3.0) / 2.0
TAU_DEGENERATE = 1e-6


def _angle_gap(a: float, b: float) -> float:
    d = (a - b) % (2 * np.pi)
    return min(d, 2 * np.pi - d)


def _wrap(phi: float) -> float:
    """Map to [-pi, pi)."""
    return (phi + np.pi) % (2 * np.pi) - np.pi


def _critical_angles(p: Cubic2) -> list[float]:
    """Roots of the angular derivative via the half-angle substitution.

    With ``t = tan(phi/2)`` the point is ``(1-t^2, 2t)/(1+t^2)`` and
    ``d/dphi p = g(1-t^2, 2t) / (1+t^2)^3`` where ``g`` is the angular
    derivative cubic. The numerator is a polynomial of degree <= 6 in ``t``;
    ``phi = pi`` (t at infinity) is added separately.
    """
    g = angular_derivative(p)
    one_minus = np.array([1.0, 0.0, -1.0])
    two_t = np.array([0.0, 2.0])
    poly = np.zeros(7)
    for (i, j), c in zip(g.exponents(), g.coeffs):
        term = np.polynomial.polynomial.polypow(one_minus, i)
        term = np.polynomial.polynomial.polymul(term, np.polynomial.polynomial.polypow(two_t, j))
        poly[: term.size] += c * term
    angles = [np.pi]
    scale = np.max(np.abs(poly))
    if scale == 0.0:
        return angles
    nz = np.nonzero(np.abs(poly) > 1e-14 * scale)[0]
    poly = poly[: nz[-1] + 1]
    if poly.size > 1:
        for r in np.polynomial.polynomial.polyroots(poly):
            if abs(r.imag) <= 1e-3 * (1.0 + abs(r)):
                angles.append(2.0 * np.arctan(r.real))
    return angles


def _polish(p: Cubic2, g: Cubic2, phi: float, iters: int = 60) -> list[float]:
    """Newton on the angular derivative; linear convergence near degenerate roots is fine.

    Nearly flat points also get a second candidate from the third derivative.
    """
    dg = angular_derivative(g)

    def at(c, a):
        return c(np.array([np.cos(a), np.sin(a)]))

    best, best_res = phi, abs(at(g, phi))
    x = phi
    for _ in range(iters):
        d = at(dg, x)
        if d == 0.0:
            break
        step = at(g, x) / d
        if abs(step) > 0.1:
            step = 0.1 * np.sign(step)
        x -= step
        res = abs(at(g, x))
        if res <= best_res:
            best, best_res = x, res
        if abs(step) < 1e-16:
            break
    if _angle_gap(best, phi) > 1e-2:
        best = phi
    # at a degenerate critical point the third derivative has a simple root,
    # which pins the location far better than the flat first derivative
    scale = max(np.max(np.abs(p.coeffs)), 1e-300)
    if abs(at(dg, best)) <= 1e-6 * scale:
        ddg = angular_derivative(dg)
        dddg = angular_derivative(ddg)
        x = best
        for _ in range(iters):
            d = at(dddg, x)
            if d == 0.0:
                break
            step = at(ddg, x) / d
            x -= step
            if abs(step) < 1e-16 or _angle_gap(x, best) > 1e-3:
                break
        same_level = abs(at(p, x) - at(p, best)) <= 1e-14 * scale
        if same_level and _angle_gap(x, best) <= 1e-3 and abs(at(g, x)) <= 1e-12 * scale:
            return [best, x]
    return [best]


def norm_s1(p: Cubic2) -> tuple[float, list[float]]:
    """Maximum of ``p`` on the unit circle and the angles in [-pi, pi) attaining it."""
    if not isinstance(p, Cubic2):
        raise TypeError("norm_s1 expects a Cubic2")
    if not np.any(p.coeffs):
        return 0.0, []
    g = angular_derivative(p)
    cands, refined = [], []
    for a in _critical_angles(p):
        found = _polish(p, g, a)
        cands.extend(_wrap(x) for x in found)
        refined.extend([False] * (len(found) - 1) + [len(found) > 1])
    dg = angular_derivative(g)
    pts = np.stack([np.cos(cands), np.sin(cands)], axis=1)
    vals = p(pts)
    curv = dg(pts)
    best = float(np.max(vals))
    scale = max(1.0, abs(best))
    keep = [
        i for i in np.argsort(cands)
        if vals[i] >= best - VALUE_TOL * scale and curv[i] <= 1e-9 * scale
    ]
    # merge candidates with no dip between them: a degenerate maximum is only
    # located to about the cube root of machine precision
    argmax: list[int] = []
    for i in keep:
        if argmax and _same_peak(p, cands[argmax[-1]], cands[i], scale):
            if _better(i, argmax[-1], vals, refined):
                argmax[-1] = i
            continue
        argmax.append(i)
    if len(argmax) > 1 and _same_peak(p, cands[argmax[-1]], cands[argmax[0]], scale):
        first, last = argmax[0], argmax.pop()
        if _better(last, first, vals, refined):
            argmax[0] = last
    return best, sorted(float(cands[i]) for i in argmax)


def _better(i: int, j: int, vals: np.ndarray, refined: list[bool]) -> bool:
    """Within one peak prefer the third-derivative estimate, then the higher value."""
    if refined[i] != refined[j]:
        return refined[i]
    return bool(vals[i] > vals[j])


def _same_peak(p: Cubic2, a: float, b: float, scale: float) -> bool:
    gap = _angle_gap(a, b)
    if gap <= ARGMAX_DEDUP:
        return True
    if gap > 1e-2:
        return False
    mid = a + 0.5 * ((b - a + np.pi) % (2 * np.pi) - np.pi)
    ends = min(p(np.array([np.cos(a), np.sin(a)])), p(np.array([np.cos(b), np.sin(b)])))
    return bool(p(np.array([np.cos(mid), np.sin(mid)])) >= ends - 1e-14 * scale)


# ------------------------------------------------------------------ the face


@dataclass(frozen=True)
class FaceFPoint:
    """Binary cubic normalised to have a maximum of value 1 at (1, 0).

    Such a cubic has leading coefficient 1 and vanishing ``x1^2 x2`` term, so it
    is fixed by the two remaining scaled coefficients.
    """

    p12: float
    p03: float

    def cubic(self) -> Cubic2:
        return Cubic2.from_scaled(1.0, 0.0, self.p12, self.p03)

    @classmethod
    def from_cubic(cls, p: Cubic2, tol: float = 1e-9) -> "FaceFPoint":
        if abs(p.p30 - 1.0) > tol or abs(p.p21) > tol:
            raise ValueError("cubic does not have value 1 and a critical point at (1, 0)")
        return cls(p.p12, p.p03)


def face_margin(q: FaceFPoint) -> float:
    """``(1 - 2 p12)(1 + p12)^2 - p03^2``; non-negative on the face when ``p12 >= -1``."""
    return (1.0 - 2.0 * q.p12) * (1.0 + q.p12) ** 2 - q.p03**2


def face_F_membership(q: FaceFPoint, tol: float = 1e-12) -> bool:
    return q.p12 >= -1.0 - tol and face_margin(q) >= -tol


def face_F_lmi(q: FaceFPoint) -> np.ndarray:
    """Symmetric matrix that is PSD exactly on the face."""
    a, b = q.p12, q.p03
    return np.array(
        [
            [3.0 - 6.0 * a, 2.0 * b, 2.0 * a - 1.0],
            [2.0 * b, 2.0 * a + 2.0, 0.0],
            [2.0 * a - 1.0, 0.0, 1.0],
        ]
    )


def face_F_membership_lmi(q: FaceFPoint, tol: float = 1e-12) -> bool:
    return bool(np.min(np.linalg.eigvalsh(face_F_lmi(q))) >= -tol)


# --------------------------------------------------------- extremal family


def extremal_poly(tau: float) -> Cubic2:
    """Boundary member of the face with maxima at angles 0 and ``maxima_angle(tau)``."""
    if abs(tau) > TAU_MAX + 1e-12:
        raise ValueError(f"parameter must lie in [-sqrt(3)/2, sqrt(3)/2], got {tau}")
    return Cubic2.from_scaled(1.0, 0.0, (1.0 - 4.0 * tau**2) / 2.0, 3.0 * tau - 4.0 * tau**3)


def maxima_angle(tau: float) -> float:
    """Signed angle of the second maximum of ``extremal_poly(tau)``."""
    return float(np.sign(tau) * np.arccos((1.0 - 4.0 * tau**2) / (1.0 + 4.0 * tau**2)))


class Membership(enum.Enum):
    INSIDE = "Inside"
    BOUNDARY = "Boundary"
    OUTSIDE = "Outside"


def membership_s1(p: Cubic2, tol: float = BOUNDARY_TOL) -> Membership:
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    val, _ = norm_s1(p)
    if val < 1.0 - tol:
        return Membership.INSIDE
    if val <= 1.0 + tol:
        return Membership.BOUNDARY
    return Membership.OUTSIDE


class S1Class(enum.Enum):
    INTERIOR = "Interior"
    FACE_INTERIOR = "FaceInterior"
    TWO_MAXIMA = "TwoMaxima"
    THREE_MAXIMA = "ThreeMaxima"
    SINGLE_DEGENERATE = "SingleDegenerate"


@dataclass
class S1Classification:
    kind: S1Class
    rotation_angle: float
    tau: float | None
    maxima: list[float] = field(default_factory=list)
    norm: float = 0.0
    face_point: FaceFPoint | None = None


def classify_s1(p: Cubic2, tol: float = BOUNDARY_TOL) -> S1Classification:
    """Locate a binary cubic relative to the unit ball of the sup norm on the circle.

    Boundary cubics are rotated so that the maximum with the smallest angle in
    [-pi, pi) sits at (1, 0); the result lists ``p`` as that normal form rotated
    by ``rotation_angle``.
    """
    val, argmax = norm_s1(p)
    if val > 1.0 + tol:
        raise ValueError(f"cubic lies outside the unit ball (norm {val:.17g})")
    if val < 1.0 - tol:
        return S1Classification(S1Class.INTERIOR, 0.0, None, argmax, val)

    phi0 = argmax[0]
    q = apply_orthogonal(p, rotation2(-phi0))
    fp = FaceFPoint(q.p12, q.p03)
    if face_margin(fp) > tol and len(argmax) == 1:
        return S1Classification(S1Class.FACE_INTERIOR, phi0, None, argmax, val, fp)

    # on the boundary the face coordinates fix the family parameter; close pairs
    # of maxima are resolved here even when the peak search merged them
    tau = float(np.sign(fp.p03) * np.sqrt(min(max(0.0, (1.0 - 2.0 * fp.p12) / 4.0), 0.75)))
    if len(argmax) >= 3 or abs(tau) >= TAU_MAX - 1e-7:
        return S1Classification(S1Class.THREE_MAXIMA, phi0, TAU_MAX, argmax, val, fp)
    if abs(tau) <= TAU_DEGENERATE:
        return S1Classification(S1Class.SINGLE_DEGENERATE, phi0, 0.0, argmax, val, fp)
    maxima = sorted({phi0, _wrap(phi0 + maxima_angle(tau))}) if len(argmax) == 1 else argmax
    return S1Classification(S1Class.TWO_MAXIMA, phi0, tau, maxima, val, fp)
