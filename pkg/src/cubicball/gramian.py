"""Four prescribed maxima: Gramians from barycentric data, point recovery and the
unique cubic critical at a given quadruple."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .poly import Cubic3

GRAM_TOL = 1e-10


@dataclass(frozen=True)
class BarycentricZ:
    """Barycentric coordinates of the origin with respect to four points."""

    z: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        if z.shape != (4,):
            raise ValueError("barycentric vector must have four entries")
        if abs(z.sum() - 1.0) > 1e-12:
            raise ValueError(f"entries must sum to 1, got {z.sum():.17g}")
        if np.any(z == 0.0):
            raise ValueError("entries must be non-zero")
        object.__setattr__(self, "z", z)

    @property
    def g(self) -> np.ndarray:
        return -3.0 + 1.0 / self.z


@dataclass(frozen=True)
class Gramian4:
    matrix: np.ndarray
    z: np.ndarray

    def kernel_residual(self) -> float:
        return float(np.max(np.abs(self.matrix @ self.z)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def is_valid(self, tol: float = GRAM_TOL) -> bool:
        w = self.eigenvalues()
        off = self.matrix[~np.eye(4, dtype=bool)]
        return bool(
            np.allclose(np.diag(self.matrix), 1.0, atol=tol)
            and self.kernel_residual() <= tol
            and abs(w[0]) <= tol
            and w[1] > tol
            and np.all(off > -0.5)
            and np.all(off < 1.0)
        )

    def to_dict(self) -> dict:
        return {"gram": [[float(v) for v in row] for row in self.matrix], "z": [float(v) for v in self.z]}


def _gram_from_g(g: np.ndarray) -> np.ndarray:
    gram = -0.5 + np.outer(g, g) / 6.0
    np.fill_diagonal(gram, 1.0)
    return gram


def gram_from_z(z) -> Gramian4:
    bz = z if isinstance(z, BarycentricZ) else BarycentricZ(np.asarray(z, dtype=float))
    return Gramian4(_gram_from_g(bz.g), bz.z)


def gram_central(b) -> Gramian4:
    """Gramian for an interior point ``b`` of the 3-simplex (all four ``z`` in (0, 1/3))."""
    b = np.asarray(b, dtype=float)
    if b.shape != (4,) or np.any(b <= 0) or abs(b.sum() - 1.0) > 1e-12:
        raise ValueError("b must be a positive 4-vector summing to 1")
    h = 1.0 / b - 1.0
    gram = -0.5 + 1.5 / np.outer(h, h)
    np.fill_diagonal(gram, 1.0)
    return Gramian4(gram, (1.0 - b) / 3.0)


def gram_wing(b) -> Gramian4:
    """Gramian for positive ``b`` (three ``z`` above 1/3, the last negative)."""
    b = np.asarray(b, dtype=float)
    if b.shape != (3,) or np.any(b <= 0):
        raise ValueError("b must be a positive 3-vector")
    s = b.sum()
    h = 1.0 / b + 1.0
    gram = np.ones((4, 4))
    gram[:3, :3] = -0.5 + 1.5 / np.outer(h, h)
    last = -0.5 + 1.5 * (s + 1.0) * b / (s * (b + 1.0))
    gram[:3, 3] = gram[3, :3] = last
    np.fill_diagonal(gram, 1.0)
    z = np.append((1.0 + b) / 3.0, -s / 3.0)
    return Gramian4(gram, z)


def gram_case_b(b) -> Gramian4:
    """Gramian with three maxima equally spaced on a great circle and inner
    products ``b`` with the fourth."""
    b = np.asarray(b, dtype=float)
    if b.shape != (3,):
        raise ValueError("b must be a 3-vector")
    if abs(b.sum()) > 1e-12 or np.any(b <= -0.5) or np.any(b >= 1.0):
        raise ValueError("b must sum to 0 with entries in (-1/2, 1)")
    gram = np.full((4, 4), -0.5)
    gram[:3, 3] = gram[3, :3] = b
    np.fill_diagonal(gram, 1.0)
    return Gramian4(gram, np.array([1.0, 1.0, 1.0, 0.0]) / 3.0)


def case_b_gram_parameters(fourth: np.ndarray) -> np.ndarray:
    """Inner products of a fourth maximum with e1 and the two points 2pi/3 away on the (e1, e2) circle."""
    s = np.sqrt(3.0) / 2.0
    ref = np.array([[1.0, 0.0, 0.0], [-0.5, s, 0.0], [-0.5, -s, 0.0]])
    return ref @ np.asarray(fourth, dtype=float)


# ------------------------------------------------------------ point recovery


def points_from_gram(gram) -> np.ndarray:
    """Four unit vectors (rows) with the given Gramian.

    Fixed orientation: the first point is e1, the second lies in the upper
    half of the (e1, e2) plane and the third has a positive last entry.
    """
    g = gram.matrix if isinstance(gram, Gramian4) else np.asarray(gram, dtype=float)
    if g.shape != (4, 4) or not np.allclose(g, g.T, atol=1e-12):
        raise ValueError("Gramian must be a symmetric 4x4 matrix")
    if not np.allclose(np.diag(g), 1.0, atol=GRAM_TOL):
        raise ValueError("Gramian must have unit diagonal")
    w, v = np.linalg.eigh(g)
    if w[0] < -1e-8 or abs(w[0]) > 1e-8 or w[1] <= 1e-10:
        raise ValueError(f"Gramian must be positive semi-definite of rank 3, eigenvalues {w}")
    pts = (v[:, 1:] * np.sqrt(w[1:])).copy()
    # canonical frame from the first three points
    q, r = np.linalg.qr(pts[:3].T)
    q = q * np.sign(np.diag(r))
    pts = pts @ q
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def barycentric_origin(points: np.ndarray) -> np.ndarray:
    """Solve ``sum z_i u_i = 0``, ``sum z_i = 1``."""
    a = np.vstack([np.asarray(points, dtype=float).T, np.ones(4)])
    return np.linalg.solve(a, np.array([0.0, 0.0, 0.0, 1.0]))


# --------------------------------------------------------- the unique cubic


def mixed_coefficients(g: np.ndarray) -> dict[tuple[int, int, int], float]:
    """Totally mixed coefficients ``q_ijk`` (0-based indices) from the ``g`` values."""
    out = {}
    for i, j, k in combinations(range(4), 3):
        gi, gj, gk = g[i], g[j], g[k]
        out[(i, j, k)] = 1.0 - (gi * gj + gi * gk + gj * gk + gi * gj * gk) / 6.0
    return out


def lifted_tensor(gram: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Symmetric 4x4x4 tensor on R^4 with unit ``q_iii``, ``q_iij = gram_ij`` and the mixed terms."""
    q = np.zeros((4, 4, 4))
    for i in range(4):
        for j in range(4):
            for k in range(4):
                idx = sorted({i, j, k})
                if len(idx) == 1:
                    q[i, j, k] = 1.0
                elif len(idx) == 2:
                    a, b = (i, j) if i != j else (i, k)
                    q[i, j, k] = gram[a, b]
    for (i, j, k), val in mixed_coefficients(g).items():
        for a, b, c in {(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)}:
            q[a, b, c] = val
    return q


@dataclass(frozen=True)
class QuadrupleCubic:
    points: np.ndarray
    cubic: Cubic3
    q: np.ndarray
    z: np.ndarray
    gram: np.ndarray

    @property
    def q_coeffs(self) -> dict[str, float]:
        """The 20 distinct ``q_ijk`` keyed by 1-based index strings, e.g. ``"123"``."""
        out = {}
        for i in range(4):
            for j in range(i, 4):
                for k in range(j, 4):
                    out[f"{i + 1}{j + 1}{k + 1}"] = float(self.q[i, j, k])
        return out


def cubic_from_quadruple(points, tol: float = 1e-8) -> QuadrupleCubic:
    """The unique cubic with critical value 1 at each of four points on the sphere.

    Raises ``ValueError`` if the points are affinely dependent or if their
    Gramian is not of the form that admits such a cubic.
    """
    u = np.asarray(points, dtype=float)
    if u.shape != (4, 3):
        raise ValueError("expected four points in R^3")
    if not np.allclose(np.linalg.norm(u, axis=1), 1.0, atol=1e-12):
        raise ValueError("points must be unit vectors")
    vol = abs(np.linalg.det(u[1:] - u[0])) / 6.0
    if vol <= 1e-9:
        raise ValueError(f"points are affinely dependent (tetrahedron volume {vol:.3g})")
    a = np.vstack([u.T, np.ones(4)])
    z = np.linalg.solve(a, np.array([0.0, 0.0, 0.0, 1.0]))
    if np.min(np.abs(z)) <= 1e-12:
        raise ValueError("three of the points lie on a great circle")
    g = -3.0 + 1.0 / z
    gram = u @ u.T
    mismatch = np.max(np.abs(gram - _gram_from_g(g)))
    if mismatch > tol:
        raise ValueError(f"no cubic has critical value 1 at these points (Gramian mismatch {mismatch:.3g})")
    q = lifted_tensor(gram, g)
    # linear part of the barycentric map; the constant part z is in the kernel of q
    m = np.linalg.inv(a)[:, :3]
    t = np.einsum("ijk,ia,jb,kc->abc", q, m, m, m)
    return QuadrupleCubic(u, Cubic3.from_tensor(t), q, z, gram)


def linear_system(z) -> tuple[np.ndarray, np.ndarray]:
    """The 10x10 system for the off-diagonal Gramian entries and mixed coefficients.

    Unknown order: G12, G13, G14, G23, G24, G34, q234, q134, q124, q123.
    """
    z1, z2, z3, z4 = np.asarray(z, dtype=float)
    m = np.zeros((10, 10))
    rows = [
        {0: z1 + z2, 8: z4, 9: z3},
        {1: z1 + z3, 7: z4, 9: z2},
        {2: z1 + z4, 7: z3, 8: z2},
        {3: z2 + z3, 6: z4, 9: z1},
        {4: z2 + z4, 6: z3, 8: z1},
        {5: z3 + z4, 6: z2, 7: z1},
        {0: z2, 1: z3, 2: z4},
        {0: z1, 3: z3, 4: z4},
        {1: z1, 3: z2, 5: z4},
        {2: z1, 4: z2, 5: z3},
    ]
    for r, entries in enumerate(rows):
        for c, v in entries.items():
            m[r, c] = v
    rhs = -np.array([0, 0, 0, 0, 0, 0, z1, z2, z3, z4], dtype=float)
    return m, rhs


def linear_system_determinant(z) -> float:
    z = np.asarray(z, dtype=float)
    return float(-12.0 * np.prod(z) ** 2 * z.sum() ** 2)


# ------------------------------------------------------ local maximum check


def ratio_hessian(z, index: int = 0) -> np.ndarray:
    """Closed-form Hessian of ``q / Omega^{3/2}`` on R^4 at the basis vector ``e_index``."""
    z = np.asarray(z, dtype=float)
    perm = [index] + [i for i in range(4) if i != index]
    w = z[perm]
    g = -3.0 + 1.0 / w
    h = np.zeros((4, 4))
    for a in range(1, 4):
        h[a, a] = -((g[0] * g[a] - 9.0) ** 2) / 12.0
    for a, b in combinations(range(1, 4), 2):
        z1, za, zb = w[0], w[a], w[b]
        num = 3 * za - 6 * z1 + 3 * zb + 9 * (z1 * za + z1 * zb - za * zb + z1**2) - 1
        h[a, b] = h[b, a] = num / (12 * z1**2 * za * zb)
    inv = np.argsort(perm)
    return h[np.ix_(inv, inv)]


def ratio_hessian_numeric(z, index: int = 0, step: float = 1e-4) -> np.ndarray:
    """Finite-difference oracle for ``ratio_hessian`` built from the lifted tensor."""
    z = np.asarray(z, dtype=float)
    g = -3.0 + 1.0 / z
    gram = _gram_from_g(g)
    q = lifted_tensor(gram, g)

    def r(y):
        return np.einsum("ijk,i,j,k->", q, y, y, y) / (y @ gram @ y) ** 1.5

    e = np.eye(4)
    y0 = e[index]
    out = np.zeros((4, 4))
    for a in range(4):
        for b in range(4):
            out[a, b] = (
                r(y0 + step * (e[a] + e[b]))
                - r(y0 + step * (e[a] - e[b]))
                - r(y0 - step * (e[a] - e[b]))
                + r(y0 - step * (e[a] + e[b]))
            ) / (4 * step * step)
    return out


class HessianStatus(enum.Enum):
    ALL_MAX_NONDEGENERATE = "AllMaxNonDegenerate"
    NOT_ALL_MAXIMA = "NotAllMaxima"


class Regime(enum.Enum):
    CENTRAL = "Central"
    WING = "Wing"


@dataclass(frozen=True)
class HessianReport:
    status: HessianStatus
    regime: Regime | None
    permutation: tuple[int, ...]
    eigenvalues: np.ndarray


def hessian_classification(z) -> HessianReport:
    """Type of the four critical points encoded by ``z`` and the parameter regime.

    The permutation lists indices so that, for the wing regime, the negative
    entry comes last.
    """
    bz = z if isinstance(z, BarycentricZ) else BarycentricZ(np.asarray(z, dtype=float))
    zz = bz.z
    gram = _gram_from_g(bz.g)
    off = gram[~np.eye(4, dtype=bool)]
    if np.any(off <= -0.5) or np.any(off >= 1.0):
        raise ValueError("off-diagonal Gramian entries must lie in (-1/2, 1)")
    eig = np.array([np.linalg.eigvalsh(ratio_hessian(zz, i)) for i in range(4)])
    # each Hessian has two zero eigenvalues (directions e_i and z); the rest decide
    scale = np.max(np.abs(eig))
    nontrivial = np.sort(eig, axis=1)[:, :2]
    ok = np.all(nontrivial < -1e-12 * scale)
    status = HessianStatus.ALL_MAX_NONDEGENERATE if ok else HessianStatus.NOT_ALL_MAXIMA
    if np.all((zz > 0) & (zz < 1.0 / 3.0)):
        return HessianReport(status, Regime.CENTRAL, (0, 1, 2, 3), eig)
    neg = np.nonzero(zz < 0)[0]
    if len(neg) == 1 and np.all(np.delete(zz, neg) > 1.0 / 3.0):
        perm = tuple(int(i) for i in range(4) if i != neg[0]) + (int(neg[0]),)
        return HessianReport(status, Regime.WING, perm, eig)
    return HessianReport(status, None, (0, 1, 2, 3), eig)


def b_from_z(z) -> tuple[Regime, np.ndarray, tuple[int, ...]]:
    """Invert the central and wing parametrisations."""
    rep = hessian_classification(z)
    zz = np.asarray(z.z if isinstance(z, BarycentricZ) else z, dtype=float)
    if rep.regime is Regime.CENTRAL:
        return rep.regime, 1.0 - 3.0 * zz, rep.permutation
    if rep.regime is Regime.WING:
        zp = zz[list(rep.permutation)]
        return rep.regime, 3.0 * zp[:3] - 1.0, rep.permutation
    raise ValueError("z is in neither the central nor the wing regime")
