"""Real trigonometric polynomials in complex Fourier form, with certified minima."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(eq=False)
class TrigPoly:
    """``s(t) = sum_k c_k exp(i k t)`` for ``k = -n..n`` with Hermitian ``c``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 == 0:
            raise ValueError("coefficient vector must have odd length 2n+1")
        self.coeffs = c

    @property
    def degree(self) -> int:
        return (self.coeffs.size - 1) // 2

    @classmethod
    def constant(cls, value: float) -> "TrigPoly":
        return cls(np.array([value], dtype=complex))

    @classmethod
    def cos(cls) -> "TrigPoly":
        return cls(np.array([0.5, 0.0, 0.5], dtype=complex))

    @classmethod
    def sin(cls) -> "TrigPoly":
        return cls(np.array([0.5j, 0.0, -0.5j], dtype=complex))

    def _padded(self, n: int) -> np.ndarray:
        pad = n - self.degree
        return np.pad(self.coeffs, (pad, pad))

    def __add__(self, other):
        if not isinstance(other, TrigPoly):
            other = TrigPoly.constant(float(other))
        n = max(self.degree, other.degree)
        return TrigPoly(self._padded(n) + other._padded(n))

    __radd__ = __add__

    def __neg__(self):
        return TrigPoly(-self.coeffs)

    def __sub__(self, other):
        return self + (-other if isinstance(other, TrigPoly) else -float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TrigPoly):
            return TrigPoly(np.convolve(self.coeffs, other.coeffs))
        return TrigPoly(self.coeffs * float(other))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = TrigPoly.constant(1.0)
        for _ in range(k):
            out = out * self
        return out

    def derivative(self) -> "TrigPoly":
        k = np.arange(-self.degree, self.degree + 1)
        return TrigPoly(1j * k * self.coeffs)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        k = np.arange(-self.degree, self.degree + 1)
        val = np.real(np.exp(1j * np.multiply.outer(t, k)) @ self.coeffs)
        return float(val) if val.ndim == 0 else val

    def sup_bound(self) -> float:
        """Upper bound on ``max |s|`` from the coefficient l1 norm."""
        return float(np.sum(np.abs(self.coeffs)))

    def trimmed(self, tol: float = 1e-15) -> "TrigPoly":
        c = self.coeffs
        scale = max(np.max(np.abs(c)), 1.0)
        n = self.degree
        while n > 0 and abs(c[0]) <= tol * scale and abs(c[-1]) <= tol * scale:
            c = c[1:-1]
            n -= 1
        return TrigPoly(c)


@dataclass(frozen=True)
class CertifiedMinimum:
    value: float
    argmin: float
    lower_bound: float


def certified_minimum(s: TrigPoly, grid: int = 4096, newton_iter: int = 60) -> CertifiedMinimum:
    """Minimum over a full period.

    Grid local minima are polished by Newton on ``s'``. The lower bound uses
    ``|s'| <= deg * max|s|`` over half a grid cell and holds unconditionally.
    """
    s = s.trimmed()
    t = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
    vals = s(t)
    deg = max(s.degree, 1)
    h = 2 * np.pi / grid
    lower = float(np.min(vals) - 0.5 * h * deg * s.sup_bound())

    ds = s.derivative()
    dds = ds.derivative()
    is_min = (vals <= np.roll(vals, 1)) & (vals <= np.roll(vals, -1))
    best_val, best_t = float(np.min(vals)), float(t[np.argmin(vals)])
    for t0 in t[is_min]:
        x = float(t0)
        for _ in range(newton_iter):
            d2 = dds(x)
            if d2 <= 0:
                break
            step = ds(x) / d2
            if abs(step) > h:
                step = np.sign(step) * h
            x -= step
            if abs(step) < 1e-15:
                break
        v = s(x)
        if v < best_val:
            best_val, best_t = v, x % (2 * np.pi)
    return CertifiedMinimum(best_val, best_t, min(lower, best_val))
