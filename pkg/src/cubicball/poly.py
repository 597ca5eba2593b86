"""Homogeneous cubic forms in two and three variables.

A cubic is stored as its monomial coefficients and exposed as the symmetric
tensor ``T`` with ``p(x) = T[x, x, x]``. Everything else (gradients, Hessians,
rotations) is a tensor contraction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial

import numpy as np

UNIT_TOL = 1e-12
ORTHO_TOL = 1e-12


def _exponents(dim: int) -> list[tuple[int, ...]]:
    """Monomial exponents of degree 3 in lexicographically decreasing order."""
    out = [e for e in itertools.product(range(3, -1, -1), repeat=dim) if sum(e) == 3]
    return out


EXPONENTS2 = _exponents(2)  # (3,0) (2,1) (1,2) (0,3)
EXPONENTS3 = _exponents(3)  # (3,0,0) (2,1,0) (2,0,1) (1,2,0) (1,1,1) ...


def multinomial(exps: tuple[int, ...]) -> int:
    out = factorial(sum(exps))
    for e in exps:
        out //= factorial(e)
    return out


def _index_of(exps: tuple[int, ...]) -> tuple[int, ...]:
    """One tensor index triple realising a monomial, e.g. (1,2,0) -> (0,1,1)."""
    idx: list[int] = []
    for axis, e in enumerate(exps):
        idx.extend([axis] * e)
    return tuple(idx)


def _basis(dim: int) -> np.ndarray:
    """Symmetric tensors of each monomial, shape (n_monomials, dim, dim, dim)."""
    exps = EXPONENTS2 if dim == 2 else EXPONENTS3
    out = np.zeros((len(exps), dim, dim, dim))
    for m, e in enumerate(exps):
        w = 1.0 / multinomial(e)
        for perm in set(itertools.permutations(_index_of(e))):
            out[(m,) + perm] = w
    return out


BASIS2 = _basis(2)
BASIS3 = _basis(3)


def symmetrize(t: np.ndarray) -> np.ndarray:
    """Average a 3-tensor over all index permutations."""
    perms = itertools.permutations(range(3))
    return sum(np.transpose(t, p) for p in perms) / 6.0


def exponent_key(exps: tuple[int, ...]) -> str:
    return "".join(str(e) for e in exps)


class _Cubic:
    """Shared behaviour; subclasses fix the dimension."""

    dim: int
    coeffs: np.ndarray

    @classmethod
    def exponents(cls) -> list[tuple[int, ...]]:
        return EXPONENTS2 if cls.dim == 2 else EXPONENTS3

    @classmethod
    def _basis(cls) -> np.ndarray:
        return BASIS2 if cls.dim == 2 else BASIS3

    @classmethod
    def from_tensor(cls, t: np.ndarray):
        t = np.asarray(t, dtype=float)
        if t.shape != (cls.dim,) * 3:
            raise ValueError(f"expected a {cls.dim}x{cls.dim}x{cls.dim} tensor, got {t.shape}")
        t = symmetrize(t)
        coeffs = np.array([multinomial(e) * t[_index_of(e)] for e in cls.exponents()])
        return cls(coeffs)

    @classmethod
    def from_monomials(cls, mapping: dict) -> "_Cubic":
        """Build from ``{"300": c, ...}`` or ``{(3,0,0): c, ...}``; missing terms are zero."""
        exps = cls.exponents()
        coeffs = np.zeros(len(exps))
        for key, val in mapping.items():
            e = parse_exponent_key(key, cls.dim) if isinstance(key, str) else tuple(key)
            if e not in exps:
                raise ValueError(f"not a cubic monomial in {cls.dim} variables: {key!r}")
            coeffs[exps.index(e)] += float(val)
        return cls(coeffs)

    @classmethod
    def zero(cls):
        return cls(np.zeros(len(cls.exponents())))

    @property
    def tensor(self) -> np.ndarray:
        return np.tensordot(self.coeffs, self._basis(), axes=1)

    def monomials(self) -> dict[str, float]:
        return {exponent_key(e): float(c) for e, c in zip(self.exponents(), self.coeffs)}

    def coefficient(self, key) -> float:
        e = parse_exponent_key(key, self.dim) if isinstance(key, str) else tuple(key)
        return float(self.coeffs[self.exponents().index(e)])

    def scaled(self, key) -> float:
        """Monomial coefficient divided by its multinomial weight (a tensor entry)."""
        e = parse_exponent_key(key, self.dim) if isinstance(key, str) else tuple(key)
        return self.coefficient(e) / multinomial(e)

    def __call__(self, x):
        return evaluate(self, x)

    def __add__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return type(self)(self.coeffs + other.coeffs)

    def __sub__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return type(self)(self.coeffs - other.coeffs)

    def __neg__(self):
        return type(self)(-self.coeffs)

    def __mul__(self, scalar):
        return type(self)(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.tensor))

    def allclose(self, other, atol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.coeffs - other.coeffs)) <= atol)

    def __repr__(self) -> str:
        terms = ", ".join(f"{k}={v:.6g}" for k, v in self.monomials().items() if v != 0.0)
        return f"{type(self).__name__}({terms})"


@dataclass(eq=False, repr=False)
class Cubic2(_Cubic):
    """Binary cubic; coefficient order x1^3, x1^2 x2, x1 x2^2, x2^3."""

    coeffs: np.ndarray
    dim = 2

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float).reshape(4).copy()

    @classmethod
    def from_scaled(cls, p30: float, p21: float, p12: float, p03: float) -> "Cubic2":
        return cls(np.array([p30, 3 * p21, 3 * p12, p03], dtype=float))

    @property
    def p30(self) -> float:
        return float(self.coeffs[0])

    @property
    def p21(self) -> float:
        return float(self.coeffs[1] / 3)

    @property
    def p12(self) -> float:
        return float(self.coeffs[2] / 3)

    @property
    def p03(self) -> float:
        return float(self.coeffs[3])


@dataclass(eq=False, repr=False)
class Cubic3(_Cubic):
    """Ternary cubic; coefficients follow ``EXPONENTS3``."""

    coeffs: np.ndarray
    dim = 3

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float).reshape(10).copy()

    # tensor-entry accessors used throughout the families and classifier
    @property
    def p120(self) -> float:
        return self.scaled((1, 2, 0))

    @property
    def p111(self) -> float:
        return self.scaled((1, 1, 1))

    @property
    def p102(self) -> float:
        return self.scaled((1, 0, 2))

    @property
    def p030(self) -> float:
        return self.scaled((0, 3, 0))

    @property
    def p021(self) -> float:
        return self.scaled((0, 2, 1))

    @property
    def p012(self) -> float:
        return self.scaled((0, 1, 2))

    @property
    def p003(self) -> float:
        return self.scaled((0, 0, 3))


Cubic = _Cubic


def parse_exponent_key(key: str, dim: int) -> tuple[int, ...]:
    if not isinstance(key, str) or len(key) != dim or not key.isdigit():
        raise ValueError(f"malformed monomial key {key!r}: expected {dim} digits")
    e = tuple(int(ch) for ch in key)
    if sum(e) != 3:
        raise ValueError(f"malformed monomial key {key!r}: exponents must sum to 3")
    return e


def cubic_class(dim: int):
    if dim == 2:
        return Cubic2
    if dim == 3:
        return Cubic3
    raise ValueError(f"dimension must be 2 or 3, got {dim}")


# ---------------------------------------------------------------- validation


def check_unit(x, tol: float = UNIT_TOL) -> np.ndarray:
    """Return ``x`` as an array, raising if it is not a unit vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] not in (2, 3):
        raise ValueError(f"expected a 2- or 3-vector, got shape {x.shape}")
    if abs(np.linalg.norm(x) - 1.0) > tol:
        raise ValueError(f"not a unit vector: |x| = {np.linalg.norm(x)!r}")
    return x


def check_orthogonal(q, tol: float = ORTHO_TOL) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {q.shape}")
    err = np.max(np.abs(q.T @ q - np.eye(q.shape[0])))
    if err > tol:
        raise ValueError(f"matrix is not orthogonal (max |Q^T Q - I| = {err:.3g})")
    return q


def rotation2(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


# ------------------------------------------------------------------ calculus


def evaluate(p: _Cubic, x) -> np.ndarray | float:
    """Value at ``x``; ``x`` may be a single point or an array of points (..., dim)."""
    x = np.asarray(x, dtype=float)
    t = p.tensor
    val = np.einsum("ijk,...i,...j,...k->...", t, x, x, x)
    return float(val) if val.ndim == 0 else val


def gradient(p: _Cubic, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return 3.0 * np.einsum("ijk,...i,...j->...k", p.tensor, x, x)


def hessian(p: _Cubic, x) -> np.ndarray:
    """Ambient Hessian ``6 T[x, ., .]``."""
    x = np.asarray(x, dtype=float)
    return 6.0 * np.einsum("ijk,...i->...jk", p.tensor, x)


def tangent_basis(u) -> np.ndarray:
    """Orthonormal basis of the tangent plane at ``u`` as columns.

    On the circle the single column is ``(-u2, u1)``. On the sphere the first
    column comes from the first coordinate axis not nearly parallel to ``u``
    and the second is ``u x v1``, so the frame is deterministic.
    """
    u = np.asarray(u, dtype=float)
    if u.shape == (2,):
        return np.array([[-u[1]], [u[0]]])
    for axis in range(3):
        e = np.zeros(3)
        e[axis] = 1.0
        w = e - np.dot(e, u) * u
        if np.linalg.norm(w) > 0.1:
            break
    v1 = w / np.linalg.norm(w)
    v2 = np.cross(u, v1)
    return np.column_stack([v1, v2])


def tangent_basis_batch(u: np.ndarray) -> np.ndarray:
    """Vectorised ``tangent_basis`` for points of shape (n, 3); returns (n, 3, 2)."""
    n = u.shape[0]
    w = np.zeros((n, 3))
    chosen = np.zeros(n, dtype=bool)
    for axis in range(3):
        cand = -u[:, axis, None] * u
        cand[:, axis] += 1.0
        ok = (~chosen) & (np.linalg.norm(cand, axis=1) > 0.1)
        w[ok] = cand[ok]
        chosen |= ok
    v1 = w / np.linalg.norm(w, axis=1, keepdims=True)
    v2 = np.cross(u, v1)
    return np.stack([v1, v2], axis=2)


def tangent_hessian(p: _Cubic, u) -> np.ndarray:
    """Riemannian Hessian at a point of the unit sphere/circle in ``tangent_basis(u)``."""
    u = check_unit(u, tol=1e-9)
    v = tangent_basis(u)
    val = evaluate(p, u)
    return v.T @ hessian(p, u) @ v - 3.0 * val * np.eye(v.shape[1])


def riemannian_gradient(p: _Cubic, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return gradient(p, u) - 3.0 * evaluate(p, u) * u


# ---------------------------------------------------------------- transforms


def apply_orthogonal(p: _Cubic, q) -> _Cubic:
    """Return ``x -> p(Q^T x)``, so the maxima of the result are ``Q`` times those of ``p``."""
    q = check_orthogonal(q)
    if q.shape[0] != p.dim:
        raise ValueError(f"matrix size {q.shape[0]} does not match cubic dimension {p.dim}")
    t = np.einsum("abc,ia,jb,kc->ijk", p.tensor, q, q, q)
    return type(p).from_tensor(t)


def restrict_to_plane(p: Cubic3, u, v) -> Cubic2:
    """The binary cubic ``(a, b) -> p(a u + b v)`` for orthonormal ``u, v``."""
    u = check_unit(u, tol=1e-9)
    v = check_unit(v, tol=1e-9)
    if abs(np.dot(u, v)) > 1e-9:
        raise ValueError("restriction vectors must be orthogonal")
    frame = np.column_stack([u, v])
    t = np.einsum("abc,ai,bj,ck->ijk", p.tensor, frame, frame, frame)
    return Cubic2.from_tensor(t)


def make_zonal(axis, lam1: float, lam3: float) -> Cubic3:
    """Zonal cubic ``lam1 <a,x>|x|^2 + lam3 <a,x>^3`` about a unit axis."""
    a = check_unit(axis, tol=1e-9)
    outer3 = np.einsum("i,j,k->ijk", a, a, a)
    mixed = symmetrize(np.einsum("i,jk->ijk", a, np.eye(3)))
    return Cubic3.from_tensor(lam1 * mixed + lam3 * outer3)


def angular_derivative(p: Cubic2) -> Cubic2:
    """The binary cubic ``x -> <grad p(x), J x>`` with ``J`` the quarter turn.

    On the unit circle this is the derivative of ``p(cos t, sin t)`` in ``t``.
    """
    j = np.array([[0.0, -1.0], [1.0, 0.0]])
    t = 3.0 * np.einsum("abd,dc->abc", p.tensor, j)
    return Cubic2.from_tensor(t)


def random_orthogonal(rng: np.random.Generator, dim: int = 3, proper: bool = False) -> np.ndarray:
    """Haar-distributed orthogonal matrix."""
    z = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    q = q * np.sign(np.diag(r))
    if proper and np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
