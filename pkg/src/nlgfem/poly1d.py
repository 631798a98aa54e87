"""Dense 1-D polynomials in the monomial basis, plus nodal Lagrange factories.

Coefficients are stored in ascending order: coeffs[n] multiplies x**n.  The
degree cap keeps products of two cubic basis factors plus a linear moment
factor representable without silent truncation.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import polynomial as npoly

MAX_DEGREE = 8


class Poly1D:
    """Polynomial with real coefficients, ascending monomial order."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if c.ndim != 1:
            raise ValueError("coeffs must be a 1-D sequence")
        if c.size == 0:
            c = np.zeros(1)
        # trim trailing zeros but keep at least the constant term
        nz = np.nonzero(c)[0]
        c = c[: nz[-1] + 1] if nz.size else c[:1]
        if c.size - 1 > MAX_DEGREE:
            raise ValueError(f"degree {c.size - 1} exceeds cap {MAX_DEGREE}")
        self.coeffs = c

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def evaluate(self, x):
        """Horner evaluation; accepts scalars or arrays."""
        return npoly.polyval(x, self.coeffs)

    __call__ = evaluate

    def multiply(self, other: "Poly1D") -> "Poly1D":
        return Poly1D(np.convolve(self.coeffs, other.coeffs))

    def derivative(self) -> "Poly1D":
        if self.degree == 0:
            return Poly1D([0.0])
        return Poly1D(npoly.polyder(self.coeffs))

    def antiderivative(self) -> "Poly1D":
        """Antiderivative with zero constant term."""
        return Poly1D(npoly.polyint(self.coeffs))

    def taylor_shift(self, l: float) -> "Poly1D":
        """Re-expand about x = l: returns q with q(t) = p(l + t).

        q[n] = sum_{j >= n} C(j, n) p[j] l^(j-n), i.e. the Taylor coefficients
        p^(n)(l)/n!.
        """
        return Poly1D(shift_coeffs(self.coeffs, l))

    def scale(self, alpha: float) -> "Poly1D":
        return Poly1D(alpha * self.coeffs)

    def __repr__(self):
        return f"Poly1D({self.coeffs.tolist()})"


def shift_coeffs(coeffs, l):
    """Taylor-shift of an ascending coefficient array about l.

    Axis 0 of `coeffs` is the coefficient axis; trailing axes (if any) and
    `l` broadcast together, so a batch of polynomials can be shifted by a
    batch of offsets in one call.  Result: q(t) = p(l + t), leading axis of
    length coeffs.shape[0], broadcast shape behind it.
    """
    c = np.asarray(coeffs, dtype=float)
    l = np.asarray(l, dtype=float)
    d = c.shape[0] - 1
    shape = np.broadcast_shapes(c.shape[1:], l.shape)
    pw = np.empty((d + 1,) + shape)
    pw[0] = 1.0
    for t in range(1, d + 1):
        pw[t] = pw[t - 1] * l
    out = np.zeros((d + 1,) + shape)
    for n in range(d + 1):
        for j in range(n, d + 1):
            out[n] += math.comb(j, n) * c[j] * pw[j - n]
    return out


def lagrange_factors(order: int, interval) -> list[Poly1D]:
    """Nodal Lagrange basis on an interval with equispaced nodes.

    Returns order+1 polynomials; factor m is 1 at node m and 0 at the other
    nodes, nodes running left to right.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    a, b = float(interval[0]), float(interval[1])
    if not b > a:
        raise ValueError("interval must have positive length")
    nodes = np.linspace(a, b, order + 1)
    out = []
    for m in range(order + 1):
        c = np.array([1.0])
        denom = 1.0
        for j in range(order + 1):
            if j == m:
                continue
            c = np.convolve(c, np.array([-nodes[j], 1.0]))
            denom *= nodes[m] - nodes[j]
        out.append(Poly1D(c / denom))
    return out
