"""Ternary cubics on the unit sphere: critical-point census, norm, brute-force
oracle, the face of cubics with a fixed maximum at e1, and maximum typing."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, least_squares
from scipy.spatial import cKDTree

from .circle import Membership
from .poly import Cubic3, evaluate, tangent_basis, tangent_basis_batch, tangent_hessian
from .trig import CertifiedMinimum, TrigPoly, certified_minimum

DEFAULT_STARTS = 20000
NEWTON_ITERS = 50
STRAGGLER_ITERS = 1000
STEP_TOL = 1e-13
CRITICAL_TOL = 1e-8
DEDUP_RADIUS = 1e-7
BLOB_RADIUS = 1e-2
DEGENERACY_TOL = 1e-8
ORDER_TOL = 1e-6
# both Hessian eigenvalues below this (relative) trigger a search for a flat point
FLAT_SEARCH = 1e-2
SHARP_TOL = 1e-3
NEAR_DEGENERATE = 1e-6
ARGMAX_TOL = 1e-9


class Morse(enum.Enum):
    MAX = "Max"
    MIN = "Min"
    SADDLE = "Saddle"

    def flipped(self) -> "Morse":
        return {Morse.MAX: Morse.MIN, Morse.MIN: Morse.MAX, Morse.SADDLE: Morse.SADDLE}[self]


class Degeneracy(enum.Enum):
    NON_DEGENERATE = "NonDegenerate"
    DOUBLE = "Double"
    TRIPLE = "Triple"
    FLAT = "Flat"
    # degenerate saddles carry no finer type
    DEGENERATE = "Degenerate"


@dataclass
class CriticalPoint:
    location: np.ndarray
    value: float
    morse: Morse
    degeneracy: Degeneracy
    eigenvalues: np.ndarray
    # rank-one Hessians: kernel direction, best curve w = a s^2 and its quartic coefficient
    kernel: np.ndarray | None = None
    curve_coefficient: float | None = None
    quartic: float | None = None

    def to_dict(self) -> dict:
        out = {
            "kind": "point",
            "location": [float(c) for c in self.location],
            "value": float(self.value),
            "morse": self.morse.value,
            "degeneracy": self.degeneracy.value,
            "eigenvalues": [float(c) for c in self.eigenvalues],
        }
        if self.kernel is not None:
            out["kernel"] = [float(c) for c in self.kernel]
        return out


@dataclass
class CriticalCircle:
    """Circle ``{x in S^2 : <normal, x> = offset}`` of critical points with a common value."""

    normal: np.ndarray
    offset: float
    value: float
    morse: Morse

    @property
    def radius(self) -> float:
        return float(np.sqrt(max(0.0, 1.0 - self.offset**2)))

    def samples(self, count: int, phase: float = 0.0) -> np.ndarray:
        frame = tangent_basis(self.normal)
        t = phase + 2 * np.pi * np.arange(count) / count
        ring = np.cos(t)[:, None] * frame[:, 0] + np.sin(t)[:, None] * frame[:, 1]
        return self.offset * self.normal + self.radius * ring

    def contains(self, x, tol: float = 1e-7) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(abs(np.dot(self.normal, x) - self.offset) <= tol)

    def to_dict(self) -> dict:
        return {
            "kind": "circle",
            "normal": [float(c) for c in self.normal],
            "offset": float(self.offset),
            "value": float(self.value),
            "morse": self.morse.value,
        }


@dataclass
class Census:
    points: list[CriticalPoint]
    circles: list[CriticalCircle] = field(default_factory=list)
    complete: bool = True
    warnings: list[str] = field(default_factory=list)

    def count(self, morse: Morse) -> int:
        return sum(1 for c in self.points if c.morse is morse)

    @property
    def euler(self) -> int:
        return self.count(Morse.MAX) - self.count(Morse.SADDLE) + self.count(Morse.MIN)

    @property
    def index_checkable(self) -> bool:
        """Isolated points whose index is known: extrema count +1, simple saddles -1."""
        return not self.circles and all(
            c.degeneracy is not Degeneracy.DEGENERATE for c in self.points
        )

    @property
    def nondegenerate(self) -> bool:
        return not self.circles and all(
            c.degeneracy is Degeneracy.NON_DEGENERATE for c in self.points
        )

    def max_value(self) -> float:
        vals = [c.value for c in self.points] + [c.value for c in self.circles]
        return max(vals)

    def global_maxima(self, tol: float = ARGMAX_TOL) -> list:
        top = self.max_value()
        thr = top - tol * max(1.0, abs(top))
        pts = [c for c in self.points if c.morse is Morse.MAX and c.value >= thr]
        circ = [c for c in self.circles if c.morse is Morse.MAX and c.value >= thr]
        return pts + circ

    def to_dict(self) -> dict:
        return {
            "maxima": self.count(Morse.MAX),
            "minima": self.count(Morse.MIN),
            "saddles": self.count(Morse.SADDLE),
            "circles": len(self.circles),
            "complete": self.complete,
            "warnings": list(self.warnings),
            "points": [c.to_dict() for c in self.points],
            "continua": [c.to_dict() for c in self.circles],
        }


# -------------------------------------------------------------- multistart


def fibonacci_sphere(count: int) -> np.ndarray:
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    r = np.sqrt(1.0 - z * z)
    theta = np.pi * (1.0 + np.sqrt(5.0)) * i
    return np.column_stack([r * np.cos(theta), r * np.sin(theta), z])


def _scale(p: Cubic3) -> float:
    return max(p.frobenius(), 1e-300)


def _newton(t: np.ndarray, x: np.ndarray, iters: int = NEWTON_ITERS) -> np.ndarray:
    """Riemannian Newton for critical points, re-centred in the tangent plane each step.

    Starts still moving after ``iters`` steps sit in the flat valley of a
    degenerate point, where convergence is only linear; they get a longer run.
    """
    x, active = _newton_pass(t, x, iters)
    # cycling starts keep a large gradient and are left alone
    active &= _residual(t, x) <= 1e-4 * max(np.linalg.norm(t), 1e-300)
    if active.any():
        x[active], _ = _newton_pass(t, x[active], STRAGGLER_ITERS)
    return x


def _newton_pass(t: np.ndarray, x: np.ndarray, iters: int) -> tuple[np.ndarray, np.ndarray]:
    scale = max(np.linalg.norm(t), 1e-300)
    flat = t.reshape(3, 9)
    x = x.copy()
    active = np.ones(len(x), dtype=bool)
    for _ in range(iters):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        xa = x[idx]
        tx = (xa @ flat).reshape(-1, 3, 3)  # T[x, ., .]
        grad = 3.0 * np.matmul(tx, xa[:, :, None])[:, :, 0]
        val = np.sum(grad * xa, axis=1) / 3.0
        v = tangent_basis_batch(xa)
        vt = v.transpose(0, 2, 1)
        g = np.matmul(vt, grad[:, :, None])[:, :, 0]
        h = 6.0 * np.matmul(vt, np.matmul(tx, v))
        h[:, 0, 0] -= 3.0 * val
        h[:, 1, 1] -= 3.0 * val
        d = _solve2(h, g, 1e-14 * scale)
        norm = np.linalg.norm(d, axis=1)
        big = norm > 0.5
        d[big] *= (0.5 / norm[big])[:, None]
        xn = xa + np.matmul(v, d[:, :, None])[:, :, 0]
        x[idx] = xn / np.linalg.norm(xn, axis=1, keepdims=True)
        # in a flat valley the gradient reaches rounding level before the step settles
        done = (norm < STEP_TOL) | (np.linalg.norm(g, axis=1) <= 4e-16 * scale)
        active[idx[done]] = False
    return x, active


def _solve2(h: np.ndarray, g: np.ndarray, thr: float) -> np.ndarray:
    """Newton steps ``-h^+ g`` for a batch of symmetric 2x2 systems."""
    a, b, c = h[:, 0, 0], h[:, 0, 1], h[:, 1, 1]
    det = a * c - b * b
    size = np.abs(a) + np.abs(c) + 2 * np.abs(b)
    ok = np.abs(det) > thr * np.maximum(size, thr)
    d = np.empty_like(g)
    inv = 1.0 / np.where(ok, det, 1.0)
    d[:, 0] = -(c * g[:, 0] - b * g[:, 1]) * inv
    d[:, 1] = -(-b * g[:, 0] + a * g[:, 1]) * inv
    if not ok.all():
        # nearly singular: pseudo-inverse drops the flat directions
        w, e = np.linalg.eigh(h[~ok])
        winv = np.where(np.abs(w) > thr, 1.0 / np.where(w == 0, 1.0, w), 0.0)
        coef = np.einsum("nba,nb->na", e, g[~ok]) * winv
        d[~ok] = -np.einsum("nab,nb->na", e, coef)
    return d


def _residual(t: np.ndarray, x: np.ndarray) -> np.ndarray:
    grad = 3.0 * np.matmul((x @ t.reshape(3, 9)).reshape(-1, 3, 3), x[:, :, None])[:, :, 0]
    val = np.einsum("ni,ni->n", grad, x) / 3.0
    return np.linalg.norm(grad - 3.0 * val[:, None] * x, axis=1)


def _cluster(x: np.ndarray, radius: float, order: np.ndarray, vals=None, vtol=None) -> list[np.ndarray]:
    """Greedy seed-based clustering (no chaining) in the given priority order."""
    tree = cKDTree(x)
    free = np.ones(len(x), dtype=bool)
    out = []
    for i in order:
        if not free[i]:
            continue
        members = np.array(tree.query_ball_point(x[i], radius), dtype=int)
        members = members[free[members]]
        if vals is not None:
            members = members[np.abs(vals[members] - vals[i]) <= vtol]
        free[members] = False
        out.append(members)
    return out


# ------------------------------------------------------------- typing


def _frame_tensors(p: Cubic3, u: np.ndarray, k: np.ndarray, n: np.ndarray) -> dict:
    t = p.tensor
    f = lambda a, b, c: float(np.einsum("ijk,i,j,k->", t, a, b, c))
    return {"ukk": f(u, k, k), "unn": f(u, n, n), "kkn": f(k, k, n), "kkk": f(k, k, k)}


def quartic_order(p: Cubic3, u, kernel) -> tuple[float, float]:
    """Best quartic coefficient of ``max - p`` along curves tangent to the kernel.

    In the gnomonic chart ``x = (u + s k + w n)/sqrt(1 + s^2 + w^2)`` at a
    rank-one maximum, the curve ``w = a s^2`` gives ``max - p = Q(a) s^4 + ...``
    with ``Q(a) = alpha a^2 - 3 T[k,k,n] a + 3 v / 8``. Returns ``(min Q, argmin a)``;
    a positive minimum means order four (double), zero means order six (triple).
    """
    u = np.asarray(u, dtype=float)
    k = np.asarray(kernel, dtype=float)
    n = np.cross(u, k)
    v = evaluate(p, u)
    f = _frame_tensors(p, u, k, n)
    alpha = 1.5 * v - 3.0 * f["unn"]
    d21 = 3.0 * f["kkn"]
    if alpha <= 0:
        return -np.inf, 0.0
    a_star = d21 / (2.0 * alpha)
    return 0.375 * v - d21**2 / (4.0 * alpha), a_star


def _ring_morse(p: Cubic3, u: np.ndarray, radius: float = 1e-2, count: int = 64) -> Morse:
    v = tangent_basis(u)
    t = 2 * np.pi * np.arange(count) / count
    ring = u + radius * (np.cos(t)[:, None] * v[:, 0] + np.sin(t)[:, None] * v[:, 1])
    ring /= np.linalg.norm(ring, axis=1, keepdims=True)
    diff = p(ring) - p(u)
    tol = 1e-13 * _scale(p)
    if np.all(diff <= tol):
        return Morse.MAX
    if np.all(diff >= -tol):
        return Morse.MIN
    return Morse.SADDLE


def classify_critical_point(p: Cubic3, u) -> CriticalPoint:
    """Morse type and degeneracy of a critical point of ``p`` on the sphere."""
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    scale = _scale(p)
    v = tangent_basis(u)
    val = evaluate(p, u)
    h = v.T @ (6.0 * np.einsum("ijk,i->jk", p.tensor, u)) @ v - 3.0 * val * np.eye(2)
    w, e = np.linalg.eigh(h)
    thr = DEGENERACY_TOL * scale
    small = np.abs(w) <= thr
    if not small.any():
        if w[1] < 0:
            morse = Morse.MAX
        elif w[0] > 0:
            morse = Morse.MIN
        else:
            morse = Morse.SADDLE
        # a degenerate point is located only to about sqrt(eps), leaving eigenvalues
        # near 1e-8; such a saddle may have index -2 or 0, so its index is not trusted
        if np.min(np.abs(w)) <= NEAR_DEGENERATE * scale:
            # a fold looks like an extremum to the Hessian but takes both signs nearby
            if morse is not Morse.SADDLE and _ring_morse(p, u, count=256) is Morse.SADDLE:
                morse = Morse.SADDLE
            if morse is Morse.SADDLE:
                return CriticalPoint(u, val, morse, Degeneracy.DEGENERATE, w)
        return CriticalPoint(u, val, morse, Degeneracy.NON_DEGENERATE, w)

    morse = _ring_morse(p, u)
    if small.all():
        deg = Degeneracy.FLAT if morse is not Morse.SADDLE else Degeneracy.DEGENERATE
        return CriticalPoint(u, val, morse, deg, w)

    kernel = v @ e[:, int(np.argmin(np.abs(w)))]
    if morse is Morse.SADDLE:
        return CriticalPoint(u, val, morse, Degeneracy.DEGENERATE, w, kernel)
    # minima are typed through the antipodal maximum of the same cubic
    sign = 1.0 if morse is Morse.MAX else -1.0
    q, a_star = quartic_order(sign * p, u, kernel)
    ref = max(abs(val), scale * 1e-3)
    deg = Degeneracy.DOUBLE if q > ORDER_TOL * ref else Degeneracy.TRIPLE
    return CriticalPoint(u, val, morse, deg, w, kernel, a_star, q)


def _flat_arcs(p: Cubic3, a: np.ndarray, b: np.ndarray, tol: float) -> np.ndarray:
    """For each row of ``b``: ``p`` neither dips nor bumps along the ridge from ``a``.

    Interior chord points are first moved across the chord to the stationary
    point of ``p``, so a curved flat valley is followed rather than cut.
    """
    t = p.tensor
    flat = t.reshape(3, 9)
    va, vb = p(a), p(b)
    lo, hi = np.minimum(va, vb) - tol, np.maximum(va, vb) + tol
    ok = np.ones(len(b), dtype=bool)
    for s in (0.25, 0.5, 0.75):
        m = (1 - s) * a + s * b
        m /= np.linalg.norm(m, axis=1, keepdims=True)
        n = np.cross(m, b - a)
        nn = np.linalg.norm(n, axis=1, keepdims=True)
        n = n / np.where(nn == 0.0, 1.0, nn)
        th = np.zeros(len(b))
        for _ in range(8):
            c, sn = np.cos(th)[:, None], np.sin(th)[:, None]
            x, dx = c * m + sn * n, -sn * m + c * n
            tx = (x @ flat).reshape(-1, 3, 3)
            txd = np.matmul(tx, dx[:, :, None])[:, :, 0]
            d1 = 3.0 * np.sum(x * txd, axis=1)
            d2 = 6.0 * np.sum(dx * txd, axis=1) - 3.0 * p(x)
            step = np.where(d2 != 0.0, d1 / np.where(d2 == 0.0, 1.0, d2), 0.0)
            th = np.clip(th - step, -1e-2, 1e-2)
        # either path counts; the projection is unreliable where p is flat across too
        ridge = p(np.cos(th)[:, None] * m + np.sin(th)[:, None] * n)
        chord = p(m)
        ok &= ((ridge >= lo) & (ridge <= hi)) | ((chord >= lo) & (chord <= hi))
    return ok


def _blobs(p: Cubic3, x: np.ndarray, vals: np.ndarray, scale: float) -> list[np.ndarray]:
    """Group critical points joined to a seed by a level ridge.

    Roots near a degenerate critical point scatter along its flat valley at
    values equal up to rounding; distinct critical points differ in value or
    are separated by a dip.
    """
    if len(x) == 0:
        return []
    tol = 2e-14 * scale
    tree = cKDTree(x)
    free = np.ones(len(x), dtype=bool)
    # roots scattered around a degenerate point have a Hessian eigenvalue that
    # shrinks with their distance from it; two sharp roots are distinct points
    sharp = np.array([np.min(np.abs(np.linalg.eigvalsh(tangent_hessian(p, u)))) >= SHARP_TOL * scale for u in x])
    out = []
    for i in np.argsort(-np.abs(vals)):
        if not free[i]:
            continue
        near = np.array(tree.query_ball_point(x[i], BLOB_RADIUS), dtype=int)
        near = near[free[near] & (near != i) & (np.abs(vals[near] - vals[i]) <= tol)]
        if sharp[i]:
            near = near[~sharp[near]]
        if len(near):
            near = near[_flat_arcs(p, x[i], x[near], tol)]
        members = np.concatenate([[i], near]).astype(int)
        free[members] = False
        out.append(members)
    return out


def refine_degenerate(p: Cubic3, u, iters: int = 50) -> np.ndarray:
    """Sharpen the location of a rank-one degenerate critical point.

    Plain Newton stalls in the flat valley. Along the kernel direction ``k`` the
    gnomonic expansion has cubic coefficient ``T[k,k,k] - 4.5 T[u,u,k]``, which
    vanishes at a degenerate extremum and varies linearly across it, so it is
    solved together with the tangent gradient by least squares.
    """
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    scale = _scale(p)
    t = p.tensor
    v0 = tangent_basis(u)

    def frame(x):
        k0 = v0[:, 0] - np.dot(v0[:, 0], x) * x
        k0 /= np.linalg.norm(k0)
        v = np.column_stack([k0, np.cross(x, k0)])
        tx = np.einsum("ijk,i->jk", t, x)
        val = float(x @ tx @ x)
        h = 6.0 * v.T @ tx @ v - 3.0 * val * np.eye(2)
        return v, tx, h

    v, _, h = frame(u)
    w, e = np.linalg.eigh(h)
    # a refined extremum may not move downhill; that would slide onto a nearby saddle
    side = 1.0 if w[1] <= 0 else -1.0 if w[0] >= 0 else 0.0
    start = float(evaluate(p, u))

    def uphill(y):
        return y is not None and side * (float(evaluate(p, y)) - start) >= -1e-15 * scale

    if np.all(np.abs(w) <= FLAT_SEARCH * scale):
        y = _flat_root(p, u, scale)
        if uphill(y):
            return y
    small = np.abs(w) <= 1e-6 * scale
    if small.sum() != 1:
        return u
    kref = v @ e[:, int(np.argmin(np.abs(w)))]

    def point(z):
        x = u + v0 @ z
        return x / np.linalg.norm(x)

    def resid(z):
        x = point(z)
        vx, tx, hx = frame(x)
        _, ex = np.linalg.eigh(hx)
        cand = vx @ ex
        k = cand[:, int(np.argmax(np.abs(cand.T @ kref)))]
        k = k * np.sign(np.dot(k, kref))
        g = 3.0 * tx @ x
        cub = np.einsum("ijk,i,j,k->", t, k, k, k) - 1.5 * np.dot(g, k)
        return np.array([g @ vx[:, 0], g @ vx[:, 1], cub]) / scale

    sol = least_squares(resid, np.zeros(2), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=iters * 3)
    x = point(sol.x)
    if np.linalg.norm(x - u) > BLOB_RADIUS or np.linalg.norm(resid(sol.x)) > np.linalg.norm(resid(np.zeros(2))):
        x = u
    y = _valley_root(p, x, kref, scale)
    if uphill(y) and np.linalg.norm(y - u) <= BLOB_RADIUS:
        return y
    return x if uphill(x) else u


def _flat_root(p: Cubic3, u: np.ndarray, scale: float):
    """Point near ``u`` where the tangent gradient and third-order chart terms vanish, if any.

    At a flat maximum the Hessian grows only quadratically away from the point,
    while the cubic part ``T[d,d,d] - 1.5 |d|^2 <grad, d>`` of the gnomonic
    expansion grows linearly, so it pins the location.
    """
    t = p.tensor
    v0 = tangent_basis(u)

    def point(z):
        x = u + v0 @ z
        return x / np.linalg.norm(x)

    def resid(z):
        x = point(z)
        v = tangent_basis(x)
        k, n = v[:, 0], v[:, 1]
        g = 3.0 * np.einsum("ijk,j,k->i", t, x, x)
        tk = np.einsum("ijk,i->jk", t, k)
        gk, gn = g @ k, g @ n
        return np.array([
            gk, gn,
            k @ tk @ k - 1.5 * gk,
            k @ tk @ n - 0.5 * gn,
            n @ tk @ n - 0.5 * gk,
            np.einsum("ijk,i,j,k->", t, n, n, n) - 1.5 * gn,
        ]) / scale

    sol = least_squares(resid, np.zeros(2), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    x = point(sol.x)
    if np.linalg.norm(x - u) > BLOB_RADIUS or np.linalg.norm(resid(sol.x)) > 1e-10:
        return None
    return x


def _valley_root(p: Cubic3, x0: np.ndarray, kref: np.ndarray, scale: float, radius: float = 3e-3, count: int = 24):
    """Root of the kernel cubic coefficient along the ridge through ``x0``.

    Least squares stalls near a triple point, where the coefficient grows like
    ``s^3``; a bracketing search along the ridge does not care about the order
    of the root.
    """
    t = p.tensor
    k0 = kref - np.dot(kref, x0) * x0
    k0 /= np.linalg.norm(k0)
    n0 = np.cross(x0, k0)

    def ridge(s):
        # maximise along n0 for fixed s in the chart x0 + s k0 + w n0
        w = 0.0
        for _ in range(30):
            y = x0 + s * k0 + w * n0
            big = 1.0 + s * s + w * w
            ty = np.einsum("ijk,i->jk", t, y)
            pv = float(y @ ty @ y)
            pn = 3.0 * float(y @ ty @ n0)
            pnn = 6.0 * float(n0 @ ty @ n0)
            fw = pn * big**-1.5 - 3.0 * pv * w * big**-2.5
            fww = pnn * big**-1.5 - 3.0 * (2.0 * pn * w + pv) * big**-2.5 + 15.0 * pv * w * w * big**-3.5
            if fww == 0.0:
                break
            step = fw / fww
            w -= step
            if abs(step) <= 1e-16:
                break
        y = x0 + s * k0 + w * n0
        return y / np.linalg.norm(y)

    def cub(s):
        y = ridge(s)
        v = tangent_basis(y)
        ty = np.einsum("ijk,i->jk", t, y)
        h = 6.0 * v.T @ ty @ v - 3.0 * float(y @ ty @ y) * np.eye(2)
        _, e = np.linalg.eigh(h)
        cand = v @ e
        k = cand[:, int(np.argmax(np.abs(cand.T @ k0)))]
        k = k * np.sign(np.dot(k, k0))
        g = 3.0 * ty @ y
        return (np.einsum("ijk,i,j,k->", t, k, k, k) - 1.5 * np.dot(g, k)) / scale

    grid = np.linspace(-radius, radius, 2 * count + 1)
    vals = np.array([cub(s) for s in grid])
    if vals[count] == 0.0:
        return ridge(0.0)
    best = None
    for i in range(len(grid) - 1):
        if np.sign(vals[i]) != np.sign(vals[i + 1]):
            mid = 0.5 * (grid[i] + grid[i + 1])
            if best is None or abs(mid) < abs(0.5 * (grid[best] + grid[best + 1])):
                best = i
    if best is None:
        return None
    s = brentq(cub, grid[best], grid[best + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return ridge(s)


# ------------------------------------------------------------------ census


def _fit_circle(x: np.ndarray) -> tuple[np.ndarray, float, np.ndarray]:
    """Affine plane through points; returns (normal, offset, residuals)."""
    c = x.mean(axis=0)
    _, _, vt = np.linalg.svd(x - c, full_matrices=False)
    n = vt[-1]
    off = float(np.dot(n, c))
    if off < 0 or (abs(off) < 1e-12 and n[np.argmax(np.abs(n))] < 0):
        n, off = -n, -off
    return n, off, np.abs(x @ n - off)


def _goes_around(x: np.ndarray, normal: np.ndarray, offset: float) -> bool:
    """Points cover the circle with no angular gap above a quarter turn.

    A flat valley of a degenerate point is locally planar too, but it only
    covers a short arc.
    """
    e = tangent_basis(normal)
    rel = x - offset * normal
    ang = np.sort(np.arctan2(rel @ e[:, 1], rel @ e[:, 0]))
    gaps = np.diff(np.concatenate([ang, ang[:1] + 2 * np.pi]))
    return bool(gaps.max() < np.pi / 2)


def _detect_circles(p: Cubic3, x: np.ndarray, vals: np.ndarray, scale: float):
    """Split representatives into circles and isolated points."""
    order = np.argsort(vals)
    gaps = np.nonzero(np.diff(vals[order]) > 1e-8 * scale)[0]
    groups = np.split(order, gaps + 1)
    circles, used = [], np.zeros(len(x), dtype=bool)
    for grp in groups:
        if len(grp) <= 20:
            continue
        members = grp
        for _ in range(3):
            n, off, res = _fit_circle(x[members])
            keep = res <= max(1e-8, 3.0 * np.median(res))
            if keep.all():
                break
            members = members[keep]
            if len(members) <= 20:
                break
        if len(members) <= 20:
            continue
        n, off, res = _fit_circle(x[members])
        spread = np.max(np.linalg.norm(x[members] - x[members].mean(axis=0), axis=1))
        if res.max() > 1e-8 or spread < 1e-3 or not _goes_around(x[members], n, off):
            continue
        v = float(np.mean(vals[members]))
        circles.append(CriticalCircle(n, off, v, _circle_morse(p, n, off, x[members[0]])))
        used[members] = True
    return circles, used


def _circle_morse(p: Cubic3, normal, offset, x, h: float = 1e-2) -> Morse:
    across = normal - np.dot(normal, x) * x
    if np.linalg.norm(across) < 1e-12:
        return _ring_morse(p, x)
    across /= np.linalg.norm(across)
    pts = np.array([x + h * across, x - h * across])
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    diff = p(pts) - p(x)
    tol = 1e-13 * _scale(p)
    if np.all(diff <= tol):
        return Morse.MAX
    if np.all(diff >= -tol):
        return Morse.MIN
    return Morse.SADDLE


def _close_antipodes(points: list[CriticalPoint], circles: list[CriticalCircle], p: Cubic3):
    """Make the census symmetric under ``x -> -x`` (which maps ``p`` to ``-p``).

    Points are visited from the highest value down; each keeps its location and its twin is
    re-derived at the exact antipode, so that loosely located degenerate points
    on both sides are not counted twice.
    """
    scale = _scale(p)
    order = sorted(range(len(points)), key=lambda i: -points[i].value)
    used = np.zeros(len(points), dtype=bool)
    out = []
    for i in order:
        if used[i]:
            continue
        c = points[i]
        used[i] = True
        out.append(c)
        for j in order:
            if used[j]:
                continue
            d = points[j]
            close = np.linalg.norm(d.location + c.location) <= BLOB_RADIUS
            if close and abs(d.value + c.value) <= 1e-9 * scale and d.morse is c.morse.flipped():
                used[j] = True
                break
        out.append(classify_critical_point(p, -c.location))
    points = out
    circ_extra = []
    for c in circles:
        twin = any(
            np.linalg.norm(d.normal + c.normal) < 1e-6 and abs(d.offset - c.offset) < 1e-6
            for d in circles
        ) or abs(c.offset) < 1e-9
        if not twin:
            circ_extra.append(CriticalCircle(-c.normal, c.offset, -c.value, c.morse.flipped()))
    return points, circles + circ_extra


def critical_points_s2(
    p: Cubic3, starts: int = DEFAULT_STARTS, check_grid: int = 150
) -> Census:
    """All critical points of ``p`` restricted to the unit sphere.

    Multistart Newton from a Fibonacci lattice, deduplication, detection of
    circles of critical points, Morse typing and antipodal closure. The
    census is cross-checked against a coarse grid maximum; anything missed is
    recovered from the grid maximiser and reported as a warning.
    """
    if not isinstance(p, Cubic3):
        raise TypeError("critical_points_s2 expects a Cubic3")
    if not np.any(p.coeffs):
        raise ValueError("the zero cubic has no isolated critical structure")
    t = p.tensor
    scale = _scale(p)
    x = _newton(t, fibonacci_sphere(starts))
    res = _residual(t, x)
    x = x[res <= 1e-10 * scale]
    notes: list[str] = []
    return _assemble(p, x, notes, check_grid, repair=True)


def _saddle_seeds(census: Census, count: int = 8) -> np.ndarray:
    """Starts around midpoints of nearby extrema of the same kind.

    A saddle squeezed between two close maxima has a tiny Newton basin that the
    global lattice can miss.
    """
    seeds = []
    for kind in (Morse.MAX, Morse.MIN):
        locs = [c.location for c in census.points if c.morse is kind]
        for i in range(len(locs)):
            for j in range(i + 1, len(locs)):
                a, b = locs[i], locs[j]
                if np.dot(a, b) < -0.5:
                    continue
                mid = a + b
                mid /= np.linalg.norm(mid)
                r = 0.25 * np.linalg.norm(a - b)
                v = tangent_basis(mid)
                t = 2 * np.pi * np.arange(count) / count
                ring = mid + r * (np.cos(t)[:, None] * v[:, 0] + np.sin(t)[:, None] * v[:, 1])
                seeds.append(mid[None, :])
                seeds.append(ring / np.linalg.norm(ring, axis=1, keepdims=True))
    return np.vstack(seeds) if seeds else np.zeros((0, 3))


def _absorb_stragglers(p: Cubic3, points: list[CriticalPoint], scale: float) -> list[CriticalPoint]:
    """Drop unconverged roots sitting on the flat valley of a degenerate point.

    Such a root has the same Morse type and value and is joined to the
    degenerate point by a level ridge; a genuine neighbour is separated by a dip.
    """
    tol = 1e-9 * scale
    degen = [c for c in points if c.degeneracy is not Degeneracy.NON_DEGENERATE]
    keep = []
    for c in points:
        absorbed = any(
            d is not c
            and d.morse is c.morse
            and np.linalg.norm(d.location - c.location) <= BLOB_RADIUS
            and abs(d.value - c.value) <= tol
            and _flat_arcs(p, d.location, c.location[None, :], tol)[0]
            for d in degen
        )
        if not absorbed:
            keep.append(c)
    return keep


def _assemble(p: Cubic3, x: np.ndarray, notes: list[str], check_grid: int, repair: bool = False) -> Census:
    t = p.tensor
    scale = _scale(p)
    res = _residual(t, x)
    reps = [m[np.argmin(res[m])] for m in _cluster(x, DEDUP_RADIUS, np.argsort(res))]
    xr = x[reps]
    vr = p(xr)
    circles, on_circle = _detect_circles(p, xr, vr, scale)
    xi, vi = xr[~on_circle], vr[~on_circle]

    points = []
    for members in _blobs(p, xi, vi, scale):
        if len(members) == 1:
            points.append(classify_critical_point(p, refine_degenerate(p, xi[members[0]])))
            continue
        # a cloud of numerically split roots around one degenerate point
        centre = xi[members[np.argmin(np.linalg.norm(xi[members] - xi[members].mean(0), axis=1))]]
        morse = _ring_morse(p, centre)
        if morse is Morse.MAX:
            centre = xi[members[np.argmax(vi[members])]]
        elif morse is Morse.MIN:
            centre = xi[members[np.argmin(vi[members])]]
        points.append(classify_critical_point(p, refine_degenerate(p, centre)))

    points = _absorb_stragglers(p, points, scale)
    points, circles = _close_antipodes(points, circles, p)
    census = Census(points, circles, True, notes)

    if check_grid:
        gval, gpt = _grid_max(p, check_grid)
        if gval > census.max_value() + 1e-12 * scale:
            extra = _newton(t, gpt[None, :])
            if _residual(t, extra)[0] <= 1e-10 * scale:
                notes.append("grid maximum exceeded the census; recovered by local Newton")
                return _assemble(p, np.vstack([x, extra, -extra]), notes, 0, repair)
            notes.append("grid maximum exceeded the census and could not be recovered")
            census.complete = False

    if census.index_checkable and census.euler != 2 and repair:
        seeds = _saddle_seeds(census)
        if len(seeds):
            extra = _newton(t, np.vstack([seeds, -seeds]))
            extra = extra[_residual(t, extra) <= 1e-10 * scale]
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                fixed = _assemble(p, np.vstack([x, extra]), list(notes), check_grid)
            if fixed.euler == 2:
                fixed.warnings.append("saddles recovered from extra starts between close extrema")
                return fixed

    if census.index_checkable and census.euler != 2:
        msg = f"incomplete census: #Max - #Saddle + #Min = {census.euler}, expected 2"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        census.warnings.append(msg)
        census.complete = False
    return census


def norm_s2(p: Cubic3, starts: int = DEFAULT_STARTS) -> tuple[float, list]:
    """Maximum of ``p`` on the sphere and every critical point or circle attaining it."""
    if not np.any(p.coeffs):
        return 0.0, []
    census = critical_points_s2(p, starts)
    return census.max_value(), census.global_maxima()


def membership_s2(p: Cubic3, tol: float = 1e-9, starts: int = DEFAULT_STARTS) -> Membership:
    val, _ = norm_s2(p, starts)
    if val < 1.0 - tol:
        return Membership.INSIDE
    if val <= 1.0 + tol:
        return Membership.BOUNDARY
    return Membership.OUTSIDE


# ------------------------------------------------------------- brute force


def _latlong(resolution: int) -> np.ndarray:
    theta = np.linspace(0.0, np.pi, resolution + 1)
    phi = np.arange(2 * resolution) * np.pi / resolution
    st = np.sin(theta)[:, None]
    return np.stack(
        [st * np.cos(phi)[None, :], st * np.sin(phi)[None, :], np.cos(theta)[:, None] + 0 * phi],
        axis=-1,
    ).reshape(-1, 3)


def _grid_max(p: Cubic3, resolution: int) -> tuple[float, np.ndarray]:
    best, arg = -np.inf, None
    pts = _latlong(resolution)
    for chunk in np.array_split(pts, max(1, len(pts) // 200000)):
        vals = p(chunk)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, arg = float(vals[i]), chunk[i]
    return best, arg


def brute_force_norm(p: Cubic3, resolution: int = 500) -> float:
    """Grid maximum over ``resolution`` latitude steps per pi of arc.

    Never exceeds the true maximum and is below it by at most
    ``brute_force_error_bound(p, resolution)``.
    """
    if resolution < 100:
        raise ValueError("resolution must be at least 100")
    return _grid_max(p, resolution)[0]


def brute_force_error_bound(p: Cubic3, resolution: int) -> float:
    """Every point lies within ``pi/(sqrt 2 resolution)`` of the grid and the second
    derivative along great circles is at most ``9 |T|_F``."""
    h = np.pi / (np.sqrt(2.0) * resolution)
    return 4.5 * p.frobenius() * h * h


# ------------------------------------------------------------- face profile


@dataclass
class FaceProfile:
    """Coefficients of the restriction to the great circle through e1 and
    ``(0, cos t, sin t)``, as trigonometric polynomials in ``t``."""

    p12: TrigPoly
    p03: TrigPoly
    delta: TrigPoly


def _check_face_form(p: Cubic3, tol: float = 1e-12) -> None:
    bad = {
        "300": abs(p.coefficient("300") - 1.0),
        "210": abs(p.coefficient("210")),
        "201": abs(p.coefficient("201")),
    }
    for key, err in bad.items():
        if err > tol:
            raise ValueError(f"cubic is not normalised at e1 (coefficient {key} off by {err:.3g})")


def face_profile(p: Cubic3) -> FaceProfile:
    _check_face_form(p)
    c, s = TrigPoly.cos(), TrigPoly.sin()
    p12 = p.p120 * c**2 + 2.0 * p.p111 * s * c + p.p102 * s**2
    p03 = p.p030 * c**3 + 3.0 * p.p021 * c**2 * s + 3.0 * p.p012 * c * s**2 + p.p003 * s**3
    delta = 1.0 - 2.0 * p12**3 - 3.0 * p12**2 - p03**2
    return FaceProfile(p12, p03, delta)


class FaceMembership(enum.Enum):
    MEMBER = "Member"
    BOUNDARY_OF_FACE = "BoundaryOfFace"
    NOT_MEMBER = "NotMember"


@dataclass
class FaceReport:
    verdict: FaceMembership
    delta_min: CertifiedMinimum
    p12_min: CertifiedMinimum


def face_calF_membership(p: Cubic3, tol: float = 1e-9, grid: int = 4096) -> FaceReport:
    prof = face_profile(p)
    dmin = certified_minimum(prof.delta, grid)
    pmin = certified_minimum(prof.p12, grid)
    if dmin.value >= tol and pmin.value >= -1.0 + tol:
        verdict = FaceMembership.MEMBER
    elif -tol <= dmin.value < tol and pmin.value >= -1.0 - tol:
        verdict = FaceMembership.BOUNDARY_OF_FACE
    else:
        verdict = FaceMembership.NOT_MEMBER
    return FaceReport(verdict, dmin, pmin)
