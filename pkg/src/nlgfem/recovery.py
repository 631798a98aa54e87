"""Gradient recovery: kernel smoothing of the discrete solution plus a
boundary correction, evaluated pointwise from the same closed-form integrals
as assembly.

The smoothed field is S(x) = P(x)/w(x) with P the kernel average of u_h and
w the kernel mass of the domain.  Its gradient follows from differentiating
the kernel under the integral, which multiplies the integrand by
2 lam^2 (y_d - x_d).  The correction term is a boundary-face sum whose per
face contribution acts only along the face normal; subtracting it restores
first-order accuracy in delta up to the boundary.

w, its derivative and the correction's volume factor use per-box integrals
over the full box extent: the element sums telescope exactly to these, so
no element loop (or cutoff) is needed for them.  The u_h sums do run over
elements and skip cells beyond the interaction stencil of x.
"""

from __future__ import annotations

import itertools

import numpy as np

from .analytic import KernelParams, int_gauss_vec, phi_stack
from .assembly import interaction_stencil
from .mesh import CartesianMesh, DofMap, boundary_faces
from .poly1d import lagrange_factors

_LOC_TOL = 1e-9


class RecoveredField:
    """Point evaluator for S(x), grad S(x) and the boundary correction F(x).

    coeffs are the nodal values of u_h; g (optional) maps face node
    coordinates and the outward normal to Neumann data for F.  Evaluation
    never mutates the referenced mesh, dofmap or coefficient array.
    """

    def __init__(self, mesh: CartesianMesh, dofmap: DofMap, coeffs,
                 params: KernelParams, g=None):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (dofmap.n_dofs,):
            raise ValueError("coeffs length does not match dofmap")
        self.mesh = mesh
        self.dofmap = dofmap
        self.coeffs = coeffs
        self.params = params
        self.g = g
        k, h = mesh.order, mesh.spacing
        self._refc = [p.coeffs for p in lagrange_factors(k, (0.0, h))]
        self._ymul = [np.convolve([0.0, 1.0], c) for c in self._refc]
        self._M = interaction_stencil(params, h)
        self._boxes = [(np.array([iv[0] for iv in box], dtype=float),
                        np.array([iv[1] for iv in box], dtype=float))
                       for box in mesh.domain.boxes]
        self._face_data = None

    # -- scalar API ----------------------------------------------------------

    def weight_w(self, x) -> float:
        w, _ = self._mass(self._as_points(x))
        return float(w[0])

    def smoothed_value(self, x) -> float:
        X = self._as_points(x)
        w, _ = self._mass(X)
        P, _ = self._usum(X)
        return float((P / w)[0])

    def smoothed_gradient(self, x) -> np.ndarray:
        return self.gradient_many(self._as_points(x))[0]

    def correction_F(self, x) -> np.ndarray:
        return self.correction_many(self._as_points(x))[0]

    def recovered_gradient(self, x) -> np.ndarray:
        X = self._as_points(x)
        return (self.gradient_many(X) - self.correction_many(X))[0]

    # -- batch API (shared by the error norms) -------------------------------

    def value_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        w, _ = self._mass(X)
        P, _ = self._usum(X)
        return P / w

    def gradient_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        w, W = self._mass(X)
        P, G = self._usum(X)
        S = P / w
        return G / w[:, None] - (S / w)[:, None] * W

    def correction_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.g is None:
            return np.zeros_like(X)
        w, _ = self._mass(X)
        return self._correction_raw(X) / (w * w)[:, None]

    def recovered_many(self, X) -> np.ndarray:
        return self.gradient_many(X) - self.correction_many(X)

    # -- internals -----------------------------------------------------------

    def _as_points(self, x):
        X = np.atleast_2d(np.asarray(x, dtype=float))
        if X.shape[1] != self.mesh.dim:
            raise ValueError("point dimension mismatch")
        return X

    def _mass(self, X):
        """Kernel mass w(x) and its gradient, via per-box closed forms."""
        lam = self.params.lam
        n, dim = X.shape
        w = np.zeros(n)
        W = np.zeros((n, dim))
        for lo, hi in self._boxes:
            st = [phi_stack(lo[d] - X[:, d], hi[d] - X[:, d], lam, 1)
                  for d in range(dim)]
            prod = np.ones(n)
            for d in range(dim):
                prod = prod * st[d][0]
            w += prod
            for d in range(dim):
                rest = np.ones(n)
                for m in range(dim):
                    if m != d:
                        rest = rest * st[m][0]
                W[:, d] += 2.0 * lam * lam * st[d][1] * rest
        return w, W

    def _locate(self, X):
        """Element index containing each point (pre: inside the domain)."""
        mesh = self.mesh
        h = mesh.spacing
        lat0 = np.floor(X / h).astype(np.int64)
        E = np.full(X.shape[0], -1, dtype=np.int64)
        for combo in itertools.product((0, -1), repeat=mesh.dim):
            pend = E < 0
            if not pend.any():
                break
            lat = lat0 + np.asarray(combo)
            corner = lat * h
            inside = pend & np.all((X >= corner - _LOC_TOL * h)
                                   & (X <= corner + h + _LOC_TOL * h), axis=1)
            rel = lat - mesh.lat_min
            inside &= np.all((rel >= 0) & (rel < mesh.lat_grid.shape), axis=1)
            idx = np.flatnonzero(inside)
            if idx.size == 0:
                continue
            cand = mesh.lat_grid[tuple(rel[idx].T)]
            E[idx[cand >= 0]] = cand[cand >= 0]
        if (E < 0).any():
            raise ValueError("point outside the domain")
        return E

    def _usum(self, X):
        """P(x) = sum_i c_i int psi_i K and its x-gradient contribution G."""
        mesh, dofmap = self.mesh, self.dofmap
        k, dim, h = mesh.order, mesh.dim, mesh.spacing
        lam = self.params.lam
        n = X.shape[0]
        E = self._locate(X)
        latE = mesh.elem_lat[E]
        R = self._M + 1

        # per-dimension, per-offset-component 1-D integral tables
        # xc = x_d - corner of the candidate cell; shared across offsets
        I0 = np.empty((dim, 2 * R + 1, n, k + 1))
        Iy = np.empty_like(I0)
        for d in range(dim):
            for mu in range(-R, R + 1):
                xc = X[:, d] - (latE[:, d] + mu) * h
                for i in range(k + 1):
                    I0[d, mu + R, :, i] = int_gauss_vec(
                        self._refc[i], 0.0, h, xc, lam)
                    Iy[d, mu + R, :, i] = int_gauss_vec(
                        self._ymul[i], 0.0, h, xc, lam)

        P = np.zeros(n)
        G = np.zeros((n, dim))
        two_l2 = 2.0 * lam * lam
        ed = dofmap.element_dofs
        shape = mesh.lat_grid.shape
        for m in itertools.product(range(-R, R + 1), repeat=dim):
            rel = latE + np.asarray(m) - mesh.lat_min
            ok = np.all((rel >= 0) & (rel < shape), axis=1)
            va = np.flatnonzero(ok)
            if va.size == 0:
                continue
            eE = mesh.lat_grid[tuple(rel[va].T)]
            keep = eE >= 0
            va, eE = va[keep], eE[keep]
            if va.size == 0:
                continue
            C = self.coeffs[ed[eE]].reshape((va.size,) + (k + 1,) * dim)
            Id = [I0[d, m[d] + R, va] for d in range(dim)]
            xcd = [X[va, d] - (latE[va, d] + m[d]) * h for d in range(dim)]
            Md = [Iy[d, m[d] + R, va] - xcd[d][:, None] * Id[d]
                  for d in range(dim)]
            if dim == 2:
                P[va] += np.einsum("pi,pj,pij->p", Id[0], Id[1], C)
                G[va, 0] += two_l2 * np.einsum("pi,pj,pij->p", Md[0], Id[1], C)
                G[va, 1] += two_l2 * np.einsum("pi,pj,pij->p", Id[0], Md[1], C)
            else:
                P[va] += np.einsum("pi,pj,pk,pijk->p", Id[0], Id[1], Id[2], C)
                G[va, 0] += two_l2 * np.einsum("pi,pj,pk,pijk->p",
                                               Md[0], Id[1], Id[2], C)
                G[va, 1] += two_l2 * np.einsum("pi,pj,pk,pijk->p",
                                               Id[0], Md[1], Id[2], C)
                G[va, 2] += two_l2 * np.einsum("pi,pj,pk,pijk->p",
                                               Id[0], Id[1], Md[2], C)
        return P, G

    def _faces(self):
        if self._face_data is None:
            out = []
            for face in boundary_faces(self.mesh):
                gv = np.asarray(self.g(face.node_coords, face.outward_normal),
                                dtype=float)
                out.append((face, gv))
            self._face_data = out
        return self._face_data

    def _correction_raw(self, X):
        """w^2 * F(x): per face, the normal-axis component of the
        boundary-volume pair integral, faces beyond d_cut skipped."""
        mesh = self.mesh
        k, dim, h = mesh.order, mesh.dim, mesh.spacing
        lam = self.params.lam
        d_cut = self.params.d_cut
        n = X.shape[0]
        F = np.zeros((n, dim))
        for face, gv in self._faces():
            d = face.axis
            tdims = face.tangent_dims
            near = np.abs(X[:, d] - face.level) <= d_cut
            for t, m in enumerate(tdims):
                lo, hi = face.extent[t]
                near &= (X[:, m] >= lo - d_cut) & (X[:, m] <= hi + d_cut)
            va = np.flatnonzero(near)
            if va.size == 0:
                continue
            Xv = X[va]
            zfac = np.exp(-lam * lam * (Xv[:, d] - face.level) ** 2)
            # trace-factor integrals over the face, per tangential dim
            It = []
            for t, m in enumerate(tdims):
                xc = Xv[:, m] - face.extent[t][0]
                It.append(np.stack([int_gauss_vec(self._refc[i], 0.0, h,
                                                  xc, lam)
                                    for i in range(k + 1)], axis=1))
            if dim == 2:
                gfac = It[0] @ gv.ravel()
            else:
                gfac = np.einsum("pi,pj,ij->p", It[0], It[1],
                                 gv.reshape(k + 1, k + 1))
            # volume factor: per box, mass in the off-axis dims times the
            # (y_d - level) moment along the face axis
            vol = np.zeros(va.size)
            for lo, hi in self._boxes:
                part = int_gauss_vec([-face.level, 1.0], lo[d], hi[d],
                                     Xv[:, d], lam)
                for m in range(dim):
                    if m != d:
                        part = part * phi_stack(lo[m] - Xv[:, m],
                                                hi[m] - Xv[:, m], lam, 0)[0]
                vol += part
            F[va, d] += zfac * gfac * vol
        return F
