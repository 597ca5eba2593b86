"""Extremality certificates and explicit perturbations inside the norm ball."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .poly import BASIS3, Cubic3, riemannian_gradient, symmetrize, tangent_basis
from .sphere import (
    CriticalCircle,
    CriticalPoint,
    Degeneracy,
    Morse,
    brute_force_norm,
    norm_s2,
    quartic_order,
)

RANK_TOL = 1e-8
CIRCLE_SAMPLES = 7
VALUE_TOL = 1e-9


def _functional(a, b, c) -> np.ndarray:
    """Row mapping monomial coefficients of a cubic to its tensor entry ``T[a, b, c]``."""
    return np.einsum("mijk,i,j,k->m", BASIS3, a, b, c)


def _frame(cp: CriticalPoint) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    u = cp.location / np.linalg.norm(cp.location)
    if cp.kernel is not None:
        k = cp.kernel - np.dot(cp.kernel, u) * u
        k /= np.linalg.norm(k)
    else:
        k = tangent_basis(u)[:, 0]
    return u, k, np.cross(u, k)


def point_conditions(p: Cubic3, cp: CriticalPoint) -> np.ndarray:
    """Linear conditions on a perturbation that keep a maximum of this type admissible.

    In the gnomonic chart ``u + s k + w n`` the perturbation expands as
    ``sum d_ij s^i w^j``. Along the curve ``w = a s^2`` a double maximum drops
    like ``s^4`` and a triple one like ``s^6``; every monomial of lower
    weighted order (``s`` weight one, ``w - a s^2`` weight two or three) must
    vanish.
    """
    u, k, n = _frame(cp)
    f = _functional
    d = {
        "00": f(u, u, u),
        "10": 3 * f(u, u, k),
        "01": 3 * f(u, u, n),
        "20": 3 * f(u, k, k),
        "11": 6 * f(u, k, n),
        "02": 3 * f(u, n, n),
        "30": f(k, k, k),
        "21": 3 * f(k, k, n),
        "12": 3 * f(k, n, n),
        "03": f(n, n, n),
    }
    rows = [d["00"], d["10"], d["01"]]
    deg = cp.degeneracy
    if deg is Degeneracy.NON_DEGENERATE:
        return np.array(rows)
    if deg is Degeneracy.FLAT:
        return np.array(list(d.values()))
    rows += [d["20"], d["11"], d["30"]]
    if deg is Degeneracy.DOUBLE:
        return np.array(rows)
    a = cp.curve_coefficient
    if a is None:
        _, a = quartic_order(p, u, k)
    rows += [a * a * d["02"] + a * d["21"], 2 * a * d["02"] + d["21"], a * a * d["12"]]
    return np.array(rows)


def circle_conditions(circle: CriticalCircle, count: int = CIRCLE_SAMPLES) -> np.ndarray:
    rows = []
    for x in circle.samples(count, phase=0.1):
        v = tangent_basis(x)
        rows += [_functional(x, x, x), 3 * _functional(x, x, v[:, 0]), 3 * _functional(x, x, v[:, 1])]
    return np.array(rows)


@dataclass
class Certificate:
    extremal: bool
    rank: int
    conditions: np.ndarray
    singular_values: np.ndarray
    # basis of perturbation directions (monomial coefficients) passing every condition
    null_space: np.ndarray = field(default_factory=lambda: np.zeros((0, 10)))

    def __iter__(self):
        return iter((self.extremal, self.rank))


def _check_maxima(p: Cubic3, maxima: list, verify_grid: int) -> None:
    if not maxima:
        raise ValueError("no maxima supplied")
    vals = [m.value for m in maxima]
    top = max(vals)
    scale = max(1.0, abs(top))
    for m in maxima:
        if m.morse is not Morse.MAX:
            raise ValueError("certificate input contains a critical point that is not a maximum")
        if abs(m.value - top) > VALUE_TOL * scale:
            raise ValueError(f"maxima values differ: {m.value:.17g} vs {top:.17g}")
        if isinstance(m, CriticalPoint):
            g = np.linalg.norm(riemannian_gradient(p, m.location))
            if g > 1e-6 * p.frobenius():
                raise ValueError(f"point {m.location} is not critical (gradient {g:.3g})")
    if verify_grid and brute_force_norm(p, verify_grid) > top + VALUE_TOL * scale:
        raise ValueError("supplied maxima are not global: the grid finds a larger value")


def extremality_certificate(p: Cubic3, maxima: list, verify_grid: int = 200) -> Certificate:
    """Rank of the linear conditions a perturbation must meet to stay in the ball.

    Full rank (10) leaves no admissible direction, so ``p`` is extremal. A cubic
    whose maxima lie below 1 is interior and never extremal.
    """
    _check_maxima(p, maxima, verify_grid)
    top = max(m.value for m in maxima)
    if top > 1.0 + VALUE_TOL:
        raise ValueError(f"cubic lies outside the unit ball (maximum {top:.17g})")
    blocks = []
    for m in maxima:
        blocks.append(circle_conditions(m) if isinstance(m, CriticalCircle) else point_conditions(p, m))
    a = np.vstack(blocks)
    _, s, vt = np.linalg.svd(a)
    rank = int(np.sum(s > RANK_TOL * s[0])) if s.size else 0
    interior = top < 1.0 - VALUE_TOL
    return Certificate(rank == 10 and not interior, rank, a, s, vt[rank:])


# ----------------------------------------------------------- perturbations


def perturbation_witness(a, b, c) -> Cubic3:
    """Product of the three linear forms vanishing on pairs of the given points.

    It vanishes to second order at each point, so adding a small multiple keeps
    non-degenerate maxima at those points non-degenerate.
    """
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    ab, bc, ca = np.cross(a, b), np.cross(b, c), np.cross(c, a)
    for name, v in (("a, b", ab), ("b, c", bc), ("c, a", ca)):
        if np.linalg.norm(v) <= 1e-12:
            raise ValueError(f"points {name} coincide or are antipodal")
    return Cubic3.from_tensor(symmetrize(np.einsum("i,j,k->ijk", ab, bc, ca)))


def witness_points(maxima: list[np.ndarray], rng: np.random.Generator | None = None) -> list[np.ndarray]:
    """Pad up to three maxima with fixed filler points far from them."""
    pts = [np.asarray(m, dtype=float) for m in maxima]
    if len(pts) > 3:
        raise ValueError("at most three maxima can be absorbed by the witness")
    filler = [np.array(v) / np.linalg.norm(v) for v in ([0.3, 0.5, 0.8], [-0.7, 0.2, 0.4], [0.1, -0.9, 0.3])]
    for f in filler:
        if len(pts) == 3:
            break
        if all(np.linalg.norm(np.cross(f, q)) > 0.2 for q in pts):
            pts.append(f)
    return pts


def inside_ball(p: Cubic3, tol: float = 1e-12) -> bool:
    return norm_s2(p)[0] <= 1.0 + tol


def witness_epsilon(p: Cubic3, delta: Cubic3, start: float = 1e-1, floor: float = 1e-9, tol: float = 1e-12) -> float:
    """Largest ``eps`` on a halving schedule with ``p +- eps delta`` inside the ball; 0 if none."""
    d = delta * (1.0 / delta.frobenius())
    eps = start
    while eps >= floor:
        if inside_ball(p + d * eps, tol) and inside_ball(p - d * eps, tol):
            return eps / delta.frobenius()
        eps *= 0.5
    return 0.0


def non_extremality_witness(p: Cubic3, maxima: list, certificate: Certificate | None = None) -> tuple[Cubic3, float]:
    """A direction ``delta`` and step ``eps`` with ``p +- eps delta`` in the ball.

    Up to three non-degenerate maxima are absorbed by the product witness;
    otherwise a direction from the null space of the certificate is used.
    Returns ``eps = 0`` when no step on the halving schedule is admissible.
    """
    simple = all(
        isinstance(m, CriticalPoint) and m.degeneracy is Degeneracy.NON_DEGENERATE for m in maxima
    )
    if simple and len(maxima) <= 3:
        delta = perturbation_witness(*witness_points([m.location for m in maxima]))
    else:
        cert = certificate or extremality_certificate(p, maxima, verify_grid=0)
        if not len(cert.null_space):
            return Cubic3.zero(), 0.0
        delta = Cubic3(cert.null_space[0])
    return delta, witness_epsilon(p, delta)
