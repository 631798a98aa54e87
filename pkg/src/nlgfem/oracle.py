"""Brute-force quadrature oracles for validating the analytic integrals.

These deliberately avoid the closed-form machinery in analytic.py: kernels
are evaluated pointwise on tensor Gauss-Legendre grids and contracted
numerically.  Every oracle value is recomputed at half the points and the
two must agree to rel_tol, otherwise the value is untrusted and an
OracleError is raised (tests error out instead of comparing).

Fixed-order Gauss resolves the Gaussian peak only for moderate lambda, so
validation cases keep delta >= 0.1 at desk-scale cells; the analytic path
has no such restriction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .analytic import KernelParams
from .mesh import BoundaryFace, CartesianMesh, DofMap
from .poly1d import lagrange_factors


class OracleError(RuntimeError):
    """Quadrature refinement check failed; oracle value untrusted."""


@dataclass(frozen=True)
class QuadSpec:
    points: int = 64
    refine: bool = True
    rel_tol: float = 1e-9


@lru_cache(maxsize=32)
def _gl(n):
    return leggauss(n)


def _mapped(interval, n):
    x, w = _gl(n)
    lo, hi = interval
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * x, 0.5 * (hi - lo) * w


def _eval_factors(factors, x):
    """Product of a list of Poly1D factors evaluated at x (1 if empty)."""
    v = np.ones_like(x)
    for p in factors:
        v = v * p.evaluate(x)
    return v


def adaptive_simpson(f, a, b, tol=1e-12, max_depth=60):
    """Adaptive Simpson quadrature with Richardson acceptance."""
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        if depth <= 0:
            raise OracleError("adaptive Simpson hit depth limit")
        if abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (recurse(a, m, fa, flm, fm, left, depth - 1)
                + recurse(m, b, fm, frm, fb, right, depth - 1))

    fa, fb = f(a), f(b)
    fm = f(0.5 * (a + b))
    whole = simpson(fa, fm, fb, a, b)
    return recurse(a, b, fa, fm, fb, whole, max_depth)


def _with_refinement(compute, spec: QuadSpec) -> float:
    val = compute(spec.points)
    if spec.refine:
        coarse = compute(max(2, spec.points // 2))
        if abs(val - coarse) > spec.rel_tol * (1.0 + abs(val)):
            raise OracleError(
                f"refinement check failed: {val!r} vs {coarse!r}")
    return val


def oracle_pair_integral(p_factors, q_factors, cellT, cellTprime,
                         params: KernelParams, variant: str = "cross",
                         spec: QuadSpec = QuadSpec()) -> float:
    """Tensor quadrature of a pair integral over cellT x cellTprime.

    variant "cross":    int_T prod_d p_d(x_d) int_T' K(x,y) prod_d q_d(y_d) dy dx
    variant "same-arg": int_T prod_d p_d(x_d) q_d(x_d) int_T' K(x,y) dy dx
    with K(x,y) = exp(-lam^2 |x-y|^2).  p_factors/q_factors hold one Poly1D
    per dimension (entries may be None for the constant 1).
    """
    if variant not in ("cross", "same-arg"):
        raise ValueError("variant must be 'cross' or 'same-arg'")
    lam = params.lam
    dim = len(cellT)

    def compute(n):
        val = 1.0
        for d in range(dim):
            xs, wx = _mapped(cellT[d], n)
            ys, wy = _mapped(cellTprime[d], n)
            K = np.exp(-lam ** 2 * (xs[:, None] - ys[None, :]) ** 2)
            pd = [p_factors[d]] if p_factors[d] is not None else []
            qd = [q_factors[d]] if q_factors[d] is not None else []
            if variant == "cross":
                left = wx * _eval_factors(pd, xs)
                right = wy * _eval_factors(qd, ys)
            else:
                left = wx * _eval_factors(pd + qd, xs)
                right = wy
            val *= left @ K @ right
        return val

    return _with_refinement(compute, spec)


def _basis_values_1d(mesh: CartesianMesh, interval, n):
    """1D factor values at mapped Gauss points: array [n, k+1]."""
    xs, w = _mapped(interval, n)
    B = np.column_stack([p.evaluate(xs)
                         for p in lagrange_factors(mesh.order, interval)])
    return xs, w, B


def _uh_on_grid(mesh, dofmap, c, e, n):
    """u_h values on the tensor Gauss grid of element e, as a dim-tensor."""
    k = mesh.order
    iv = mesh.element_intervals(e)
    Bs, wts = [], []
    for d in range(mesh.dim):
        _, w, B = _basis_values_1d(mesh, iv[d], n)
        Bs.append(B)
        wts.append(w)
    loc = c[dofmap.element_dofs[e]].reshape((k + 1,) * mesh.dim)
    if mesh.dim == 2:
        U = np.einsum("ai,bj,ij->ab", Bs[0], Bs[1], loc)
    else:
        U = np.einsum("ai,bj,ck,ijk->abc", Bs[0], Bs[1], Bs[2], loc)
    return U, wts


def _pair_contract(U, V, wx, wy, Ks):
    """sum_xy W(x)W(y) K(x,y) U(x) V(y) with K = prod_d Ks[d]."""
    dim = len(Ks)
    Kw = [ (wx[d][:, None] * Ks[d]) * wy[d][None, :] for d in range(dim) ]
    if dim == 2:
        return float(np.einsum("ab,ac,bd,cd->", U, Kw[0], Kw[1], V, optimize=True))
    return float(np.einsum("abc,ad,be,cf,def->", U, Kw[0], Kw[1], Kw[2], V,
                           optimize=True))


def oracle_nonlocal_energy(mesh: CartesianMesh, dofmap: DofMap, c,
                           params: KernelParams,
                           spec: QuadSpec = QuadSpec()) -> float:
    """(E_delta(u_h))^2 = 1/(2 delta^2) iint R (u(x)-u(y))^2 + iint Rbar u(x)u(y).

    Tensor quadrature over all element pairs; intended for small meshes.
    """
    lam = params.lam
    c = np.asarray(c, dtype=float)

    def compute(n):
        total = 0.0
        grids = [_uh_on_grid(mesh, dofmap, c, e, n) for e in range(mesh.n_elements)]
        xs_all = []
        for e in range(mesh.n_elements):
            iv = mesh.element_intervals(e)
            xs_all.append([_mapped(iv[d], n)[0] for d in range(mesh.dim)])
        ones = np.ones_like(grids[0][0])
        for eT in range(mesh.n_elements):
            U, wx = grids[eT]
            for eP in range(mesh.n_elements):
                V, wy = grids[eP]
                Ks = [np.exp(-lam ** 2 * (xs_all[eT][d][:, None]
                                          - xs_all[eP][d][None, :]) ** 2)
                      for d in range(mesh.dim)]
                s_uv = _pair_contract(U, V, wx, wy, Ks)
                s_u2 = _pair_contract(U * U, ones, wx, wy, Ks)
                s_v2 = _pair_contract(ones, V * V, wx, wy, Ks)
                total += (s_u2 + s_v2 - 2.0 * s_uv) / (2.0 * params.delta ** 2)
                total += s_uv / params.s ** 2
        return total

    return _with_refinement(compute, spec)


def oracle_boundary_integral(face: BoundaryFace, cell, params: KernelParams,
                             p_factors, moment: bool = False, at_point=None,
                             spec: QuadSpec = QuadSpec()) -> float:
    """Mixed (dim + dim-1)-dimensional quadrature coupling a cell and a face.

    moment=False (load form): p_factors = (cell_factors, face_factors);
        value = int_cell int_face K(x,z) prod p_d(x_d) prod ptilde_t(z_t) dS_z dx.
    moment=True (correction form): requires at_point x*; p_factors = face
        factors only; value = int_face int_cell K(x*,y) K(x*,z) (y_axis - level)
        prod ptilde_t(z_t) dy dS_z, the face's contribution along its normal
        axis for one trace basis factor set.
    """
    lam = params.lam
    dim = len(cell)
    d_ax = face.axis
    tdims = face.tangent_dims

    if not moment:
        cell_factors, face_factors = p_factors

        def compute(n):
            val = 1.0
            for t, m in enumerate(tdims):
                xs, wx = _mapped(cell[m], n)
                zs, wz = _mapped(face.extent[t], n)
                K = np.exp(-lam ** 2 * (xs[:, None] - zs[None, :]) ** 2)
                left = wx * _eval_factors([cell_factors[m]] if cell_factors[m] is not None else [], xs)
                right = wz * _eval_factors([face_factors[t]] if face_factors[t] is not None else [], zs)
                val *= left @ K @ right
            # normal axis: cell integral against the kernel at the face level
            xs, wx = _mapped(cell[d_ax], n)
            pd = [cell_factors[d_ax]] if cell_factors[d_ax] is not None else []
            val *= (wx * _eval_factors(pd, xs)) @ np.exp(-lam ** 2 * (xs - face.level) ** 2)
            return val

        return _with_refinement(compute, spec)

    if at_point is None:
        raise ValueError("moment variant needs at_point")
    x = np.asarray(at_point, dtype=float)
    face_factors = p_factors

    def compute(n):
        # z-side: kernel from x* to the face, with trace factors
        val = float(np.exp(-lam ** 2 * (x[d_ax] - face.level) ** 2))
        for t, m in enumerate(tdims):
            zs, wz = _mapped(face.extent[t], n)
            fz = _eval_factors([face_factors[t]] if face_factors[t] is not None else [], zs)
            val *= np.sum(wz * fz * np.exp(-lam ** 2 * (x[m] - zs) ** 2))
        # y-side: kernel from x* over the cell with the (y_axis - level) moment
        for m in range(dim):
            ys, wy = _mapped(cell[m], n)
            ker = np.exp(-lam ** 2 * (x[m] - ys) ** 2)
            if m == d_ax:
                val *= np.sum(wy * (ys - face.level) * ker)
            else:
                val *= np.sum(wy * ker)
        return val

    return _with_refinement(compute, spec)


def oracle_weight(mesh: CartesianMesh, params: KernelParams, x,
                  spec: QuadSpec = QuadSpec()) -> float:
    """w_delta(x) = int_Omega exp(-lam^2 |x-y|^2) dy by per-element quadrature."""
    lam = params.lam
    x = np.asarray(x, dtype=float)

    def compute(n):
        total = 0.0
        for e in range(mesh.n_elements):
            iv = mesh.element_intervals(e)
            val = 1.0
            for d in range(mesh.dim):
                ys, wy = _mapped(iv[d], n)
                val *= np.sum(wy * np.exp(-lam ** 2 * (x[d] - ys) ** 2))
            total += val
        return total

    return _with_refinement(compute, spec)
