"""
Exact calculus on exponential polynomials  sum_i c_i t^p_i exp(r_i t - b_i).

Every closed-form inventory path in the package (sinh ramps, Nash modes,
Stackelberg forcing, resonant t*exp(-t/tau) terms) lives in this family, and
so does every cost integrand built from them.  Integrals over [0, T] are
evaluated analytically with exponents kept non-positive, which keeps large
curvatures (k*T in the hundreds) free of overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

Term = Tuple[float, int, float, float]  # coef, power, rate, offset


def _phi(n: int, w: float) -> float:
    """int_0^1 u^n e^{w u} du for w <= 0."""
    if abs(w) < 2.0:
        total, term, m = 0.0, 1.0, 0
        while True:
            contrib = term / (n + m + 1)
            total += contrib
            m += 1
            term *= w / m
            if abs(contrib) < 1e-18 * abs(total) and m > 2:
                return total
    value = math.expm1(w) / w
    ew = math.exp(w)
    for k in range(1, n + 1):
        value = (ew - k * value) / w
    return value


def _psi(n: int, z: float) -> float:
    """int_0^1 u^n e^{z (u - 1)} du for z >= 0."""
    return sum(math.comb(n, j) * (-1) ** j * _phi(j, -z) for j in range(n + 1))


def integrate_term(coef: float, power: int, rate: float, offset: float, t_end: float) -> float:
    """int_0^T c t^n exp(r t - b) dt."""
    if coef == 0.0:
        return 0.0
    z = rate * t_end
    scale = t_end ** (power + 1)
    if rate >= 0:
        return coef * math.exp(z - offset) * scale * _psi(power, z)
    return coef * math.exp(-offset) * scale * _phi(power, z)


@dataclass(frozen=True)
class ExpPoly:
    terms: Tuple[Term, ...] = ()

    @classmethod
    def const(cls, c: float) -> "ExpPoly":
        return cls(((float(c), 0, 0.0, 0.0),))

    @classmethod
    def linear(cls, slope: float) -> "ExpPoly":
        return cls(((float(slope), 1, 0.0, 0.0),))

    @classmethod
    def exp(cls, coef: float, rate: float, anchor: float = 0.0, power: int = 0) -> "ExpPoly":
        """coef * t^power * exp(rate * (t - anchor))."""
        return cls(((float(coef), power, float(rate), float(rate * anchor)),))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for c, p, r, b in self.terms:
            out = out + c * t**p * np.exp(r * t - b)
        return out

    def derivative(self) -> "ExpPoly":
        out = []
        for c, p, r, b in self.terms:
            if p > 0:
                out.append((c * p, p - 1, r, b))
            if r != 0.0:
                out.append((c * r, p, r, b))
        return ExpPoly(tuple(out))

    def integral(self, t_end: float) -> float:
        return math.fsum(integrate_term(c, p, r, b, t_end) for c, p, r, b in self.terms)

    def __add__(self, other) -> "ExpPoly":
        if not isinstance(other, ExpPoly):
            other = ExpPoly.const(other)
        return ExpPoly(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self) -> "ExpPoly":
        return self * -1.0

    def __sub__(self, other) -> "ExpPoly":
        if not isinstance(other, ExpPoly):
            other = ExpPoly.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "ExpPoly":
        return (-self) + other

    def __mul__(self, other) -> "ExpPoly":
        if not isinstance(other, ExpPoly):
            s = float(other)
            return ExpPoly(tuple((c * s, p, r, b) for c, p, r, b in self.terms))
        out = []
        for c1, p1, r1, b1 in self.terms:
            for c2, p2, r2, b2 in other.terms:
                out.append((c1 * c2, p1 + p2, r1 + r2, b1 + b2))
        return ExpPoly(tuple(out))

    __rmul__ = __mul__

    def generator(self):
        """Callable t -> (values, derivative values), as expected by InventoryPath."""
        deriv = self.derivative()

        def gen(t):
            return self(t), deriv(t)

        return gen
