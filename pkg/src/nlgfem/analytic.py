"""Closed-form integrals of polynomials against Gaussian kernels.

Everything the assembly and recovery stages need reduces to four 1-D
primitives:

    phi(a, b, lam, k)              = int_a^b x^k exp(-lam^2 x^2) dx
    phi_shifted(a, b, l, lam, n)   = int_a^b x^n exp(-lam^2 (x-l)^2) dx
    int_gauss_poly(p, a, b, l, lam)= int_a^b p(x) exp(-lam^2 (x-l)^2) dx
    double_gauss_poly(p, q, ...)   = int_a^b p(x) int_ap^bp exp(-lam^2 (x-y)^2) q(y) dy dx

phi is evaluated by a two-term recursion from erf/exponential base cases,
the single integral by Taylor-shifting p about the Gaussian center, and the
double integral by integration by parts, which lowers the degree of q by one
per level until it vanishes.

The module-level functions take scalars and return floats.  The *_vec
variants broadcast over numpy arrays of interval endpoints and are what the
assembly hot loops call; the scalar functions delegate to them so there is a
single code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .poly1d import Poly1D, shift_coeffs

SQRT_PI = math.sqrt(math.pi)
INV_SQRT_PI = 1.0 / SQRT_PI

MAX_PHI_K = 10
_MAX_DOUBLE_LEVELS = 12


@dataclass(frozen=True)
class KernelParams:
    """Gaussian-kernel parameters: horizon delta, shape factor s.

    The kernel is exp(-lam^2 |x-y|^2) with lam = s/(2 delta); cutoff_eps
    sets where the tail is treated as zero (see d_cut).
    """

    delta: float
    s: float = 2.0
    cutoff_eps: float = 1e-16

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not self.s > 0:
            raise ValueError("s must be positive")
        if not 0 < self.cutoff_eps < 1:
            raise ValueError("cutoff_eps must lie in (0, 1)")

    @property
    def lam(self) -> float:
        return self.s / (2.0 * self.delta)

    @property
    def d_cut(self) -> float:
        """Distance beyond which exp(-lam^2 d^2) < cutoff_eps."""
        return math.sqrt(math.log(1.0 / self.cutoff_eps)) / self.lam


# ----------------------------------------------------------------------------
# Error function (rational approximations, Cody style; |error| <= 1e-15).
# Implemented in-repo to avoid a dependency and to vectorize over arrays.

_ERF_A = (3.16112374387056560e0, 1.13864154151050156e2,
          3.77485237685302021e2, 3.20937758913846947e3)
_ERF_A4 = 1.85777706184603153e-1
_ERF_B = (2.36012909523441209e1, 2.44024637934444173e2,
          1.28261652607737228e3, 2.84423683343917062e3)

_ERFC_C = (5.64188496988670089e-1, 8.88314979438837594e0,
           6.61191906371416295e1, 2.98635138197400131e2,
           8.81952221241769090e2, 1.71204761263407058e3,
           2.05107837782607147e3, 1.23033935479799725e3)
_ERFC_C8 = 2.15311535474403846e-8
_ERFC_D = (1.57449261107098347e1, 1.17693950891312499e2,
           5.37181101862009858e2, 1.62138957456669019e3,
           3.29079923573345963e3, 4.36261909014324716e3,
           3.43936767414372164e3, 1.23033935480374942e3)

_ERFC_P = (3.05326634961232344e-1, 3.60344899949804439e-1,
           1.25781726111229246e-1, 1.60837851487422766e-2,
           6.58749161529837803e-4)
_ERFC_P5 = 1.63153871373020978e-2
_ERFC_Q = (2.56852019228982242e0, 1.87295284992346047e0,
           5.27905102951428412e-1, 6.05183413124413191e-2,
           2.33520497626869185e-3)


def _erf_small(x):
    """erf on |x| <= 0.46875 via the odd rational x * P(x^2)/Q(x^2)."""
    z = x * x
    num = _ERF_A4 * z
    den = z
    for c, d in zip(_ERF_A[:3], _ERF_B[:3]):
        num = (num + c) * z
        den = (den + d) * z
    return x * (num + _ERF_A[3]) / (den + _ERF_B[3])


def _exp_msq(y):
    """exp(-y^2) split to limit rounding in the argument."""
    ysq = np.trunc(y * 16.0) / 16.0
    return np.exp(-ysq * ysq) * np.exp(-(y - ysq) * (y + ysq))


def _erfc_pos(y):
    """erfc on y >= 0.46875."""
    out = np.empty_like(y)
    mid = y <= 4.0
    if np.any(mid):
        t = y[mid]
        num = _ERFC_C8 * t
        den = t
        for c, d in zip(_ERFC_C[:7], _ERFC_D[:7]):
            num = (num + c) * t
            den = (den + d) * t
        out[mid] = (num + _ERFC_C[7]) / (den + _ERFC_D[7]) * _exp_msq(t)
    far = ~mid
    if np.any(far):
        t = y[far]
        z = 1.0 / (t * t)
        num = _ERFC_P5 * z
        den = z
        for c, d in zip(_ERFC_P[:4], _ERFC_Q[:4]):
            num = (num + c) * z
            den = (den + d) * z
        r = z * (num + _ERFC_P[4]) / (den + _ERFC_Q[4])
        out[far] = (INV_SQRT_PI - r) / t * _exp_msq(t)
    return out


def erf(x):
    """Error function, |abs error| <= 1e-15; saturates to +-1 for |x| >= 6."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xv = np.atleast_1d(x)
    y = np.abs(xv)
    out = np.empty_like(xv)
    small = y <= 0.46875
    if np.any(small):
        out[small] = _erf_small(xv[small])
    mid = ~small & (y < 6.0)
    if np.any(mid):
        out[mid] = np.copysign(1.0 - _erfc_pos(y[mid]), xv[mid])
    sat = y >= 6.0
    if np.any(sat):
        out[sat] = np.copysign(1.0, xv[sat])
    return float(out[0]) if scalar else out


def erfc(x):
    """Complementary error function, accurate in the right tail."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xv = np.atleast_1d(x)
    out = np.empty_like(xv)
    small = np.abs(xv) <= 0.46875
    if np.any(small):
        out[small] = 1.0 - _erf_small(xv[small])
    pos = xv > 0.46875
    if np.any(pos):
        out[pos] = _erfc_pos(xv[pos])
    neg = xv < -0.46875
    if np.any(neg):
        out[neg] = 2.0 - _erfc_pos(-xv[neg])
    return float(out[0]) if scalar else out


# ----------------------------------------------------------------------------
# phi and the vectorized stack.

def phi_stack(a, b, lam, kmax):
    """Stack [phi(a,b,lam,k) for k in 0..kmax], broadcasting over a, b.

    Result shape: (kmax+1,) + broadcast(a, b).shape.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    la, lb = lam * a, lam * b
    ea, eb = np.exp(-la * la), np.exp(-lb * lb)
    inv2 = 1.0 / (2.0 * lam * lam)
    out = np.empty((kmax + 1,) + a.shape)
    # erf(lb) - erf(la) through erfc so the right tail keeps relative accuracy
    m = (a + b) >= 0
    x1 = np.where(m, la, -lb)
    x2 = np.where(m, lb, -la)
    out[0] = (SQRT_PI / (2.0 * lam)) * (erfc(np.atleast_1d(x1))
                                        - erfc(np.atleast_1d(x2))).reshape(a.shape)
    if kmax >= 1:
        out[1] = (ea - eb) * inv2
    pa, pb = a, b
    for k in range(2, kmax + 1):
        out[k] = (pa * ea - pb * eb) * inv2 + (k - 1) * inv2 * out[k - 2]
        pa = pa * a
        pb = pb * b
    return out


def phi(a: float, b: float, lam: float, k: int) -> float:
    """int_a^b x^k exp(-lam^2 x^2) dx by the two-term recursion."""
    if k < 0 or k > MAX_PHI_K:
        raise ValueError(f"k must lie in 0..{MAX_PHI_K}")
    return float(phi_stack(a, b, lam, k)[k])


def phi_shifted(a: float, b: float, l: float, lam: float, n: int) -> float:
    """int_a^b x^n exp(-lam^2 (x-l)^2) dx via the binomial expansion of x^n."""
    if n < 0 or n > MAX_PHI_K:
        raise ValueError(f"n must lie in 0..{MAX_PHI_K}")
    st = phi_stack(a - l, b - l, lam, n)
    acc = 0.0
    for k in range(n + 1):
        acc += math.comb(n, k) * l ** (n - k) * float(st[k])
    return acc


def _coeffs_of(p):
    if isinstance(p, Poly1D):
        return p.coeffs
    c = np.atleast_1d(np.asarray(p, dtype=float))
    nz = np.nonzero(c)[0]
    return c[: nz[-1] + 1] if nz.size else c[:1]


def int_gauss_vec(coeffs, a, b, l, lam):
    """int_a^b p(x) exp(-lam^2 (x-l)^2) dx, broadcasting over a, b, l.

    Internal: no degree cap.  Axis 0 of coeffs is the coefficient axis;
    trailing axes broadcast with the endpoints, so batches of polynomials
    integrate in one call.  Taylor-shifts p about l and sums the shifted
    coefficients against phi(a-l, b-l, lam, k).
    """
    c = np.asarray(coeffs, dtype=float)
    a, b, l = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float),
                                  np.asarray(l, float))
    sc = shift_coeffs(c, l)
    st = phi_stack(a - l, b - l, lam, c.shape[0] - 1)
    if sc.shape != st.shape:
        sc, st = np.broadcast_arrays(sc, st)
    return np.einsum("k...,k...->...", sc, st)


def int_gauss_poly(p, a: float, b: float, l: float, lam: float) -> float:
    """int_a^b p(x) exp(-lam^2 (x-l)^2) dx for deg p <= 8."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    c = _coeffs_of(p)
    if c.size - 1 > 8:
        raise ValueError("deg p must be <= 8")
    return float(int_gauss_vec(c, a, b, l, lam))


def _trim_high(c):
    """Drop trailing coefficient slices (axis 0) that are identically zero."""
    if c.ndim == 1:
        return np.trim_zeros(c, "b")
    nz = np.flatnonzero(np.any(c.reshape(c.shape[0], -1) != 0.0, axis=1))
    return c[: nz[-1] + 1] if nz.size else c[:0]


def double_gauss_vec(pc, qc, lam, a, b, ap, bp):
    """int_a^b p(x) int_ap^bp exp(-lam^2 (x-y)^2) q(y) dy dx, broadcast form.

    Both polynomials live in the same global coordinate; axis 0 of pc/qc is
    the coefficient axis and trailing axes broadcast with the endpoints.
    Integration by parts trades the outer polynomial for its antiderivative
    and differentiates q; each level contributes four single integrals with
    alternating sign and the recursion ends once q is identically zero.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    a, b, ap, bp = np.broadcast_arrays(
        np.asarray(a, float), np.asarray(b, float),
        np.asarray(ap, float), np.asarray(bp, float))
    pc = np.asarray(pc, dtype=float)
    qc = _trim_high(np.asarray(qc, dtype=float))
    shape = np.broadcast_shapes(a.shape, pc.shape[1:], qc.shape[1:])
    total = np.zeros(shape)
    sign = 1.0
    for _ in range(_MAX_DOUBLE_LEVELS):
        if qc.shape[0] == 0:
            return total
        cap = npoly.polyint(pc)
        term = (npoly.polyval(b, cap, tensor=False)
                * int_gauss_vec(qc, ap, bp, b, lam)
                - npoly.polyval(a, cap, tensor=False)
                * int_gauss_vec(qc, ap, bp, a, lam)
                + npoly.polyval(bp, qc, tensor=False)
                * int_gauss_vec(cap, a, b, bp, lam)
                - npoly.polyval(ap, qc, tensor=False)
                * int_gauss_vec(cap, a, b, ap, lam))
        total += sign * term
        pc = cap
        qc = npoly.polyder(qc) if qc.shape[0] > 1 else qc[:0]
        sign = -sign
    raise RuntimeError("double_gauss recursion exceeded depth cap 12")


def double_gauss_poly(p, q, lam: float, a: float, b: float,
                      ap: float, bp: float) -> float:
    """Double Gaussian-weighted integral for deg p, deg q <= 6."""
    pc, qc = _coeffs_of(p), _coeffs_of(q)
    if pc.size - 1 > 6 or qc.size - 1 > 6:
        raise ValueError("deg p and deg q must be <= 6")
    return float(double_gauss_vec(pc, qc, lam, a, b, ap, bp))
