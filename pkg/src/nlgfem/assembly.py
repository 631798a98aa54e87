"""Quadrature-free assembly of the nonlocal stiffness matrix and load vector.

Every matrix entry is a sum over element pairs of products of 1-D analytic
integrals (the separable Gaussian makes the 2*dim-fold integrals factor).
Three bilinear terms arise; the mass-like term T1 carries both basis factors
at the same argument, the cross term T2 couples the two elements, and the
smoothing term equals T2 up to the 1/s^2 kernel factor, so an entry
contribution is (1/delta^2)*T1 + (1/s^2 - 1/delta^2)*T2.

Two integral sources share one scatter engine: the generic path evaluates
the pair integrals per element pair, while the translation-invariance fast
path looks them up in per-offset tables (on a uniform mesh the values depend
only on the integer element offset).  Pairs whose per-dimension offset
exceeds the interaction stencil are skipped; the Gaussian tail there is
below cutoff_eps.

Assembly is serial and deterministic: offsets in lexicographic order,
accumulation by ordered bincount.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .analytic import KernelParams, double_gauss_vec, int_gauss_vec
from .mesh import CartesianMesh, DofMap, Element, boundary_faces
from .poly1d import lagrange_factors, shift_coeffs
from .sparse import SparseSymMatrix

_FLUSH_ENTRIES = 8_000_000
_NNZ_GUARD = 200_000_000


def interaction_stencil(params: KernelParams, h: float) -> int:
    """Offsets beyond M = ceil(d_cut/h) cells are skipped.

    A reach below 1e-6 cells collapses to M = 0: at that scale the kernel is
    zero at any resolvable separation, so only overlapping cells interact.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    ratio = params.d_cut / h
    if ratio < 1e-6:
        return 0
    return int(math.ceil(ratio))


@dataclass
class PairBlock:
    """Dense local blocks for one ordered element pair (T, Tprime).

    t1[i, j] = prod_d Ibar(p_{j_d} * p_{i_d}, 1)  (both factors on T),
    t2[i, j] = prod_d Ibar(p_{j_d} on T, p_{i_d} on Tprime); the smoothing
    term T3 reuses t2 (its 1/s^2 enters in the entry combination).
    """

    T: int
    Tprime: int
    t1: np.ndarray
    t2: np.ndarray

    def term(self, tag: str) -> np.ndarray:
        if tag == "t1":
            return self.t1
        if tag in ("t2", "t3"):
            return self.t2
        raise ValueError("tag must be 't1', 't2' or 't3'")


def _combine_dims(mats):
    """Tensor blocks from per-dimension (k+1)x(k+1) (or batched) matrices."""
    if len(mats) == 2:
        out = np.einsum("...ij,...kl->...ikjl", mats[0], mats[1])
    else:
        out = np.einsum("...ij,...kl,...mn->...ikmjln", mats[0], mats[1], mats[2])
    loc = round(out.size ** 0.5) if out.ndim == 2 * len(mats) else None
    if loc is not None:
        return out.reshape(loc, loc)
    batch = out.shape[0]
    loc = round((out.size // batch) ** 0.5)
    return out.reshape(batch, loc, loc)


def pair_stiffness_block(T: Element, Tprime: Element, params: KernelParams,
                         order: int | None = None) -> PairBlock:
    """Local T1/T2 blocks for one ordered element pair, from first principles."""
    dim = len(T.intervals)
    k = len(T.factors[0]) - 1
    if order is not None and order != k:
        raise ValueError("order does not match element factors")
    lam = params.lam
    V1, V2 = [], []
    for d in range(dim):
        a, b = T.intervals[d]
        ap, bp = Tprime.intervals[d]
        m1 = np.empty((k + 1, k + 1))
        m2 = np.empty((k + 1, k + 1))
        for i in range(k + 1):
            for j in range(k + 1):
                pj = T.factors[d][j].coeffs
                pi = T.factors[d][i].coeffs
                m1[i, j] = double_gauss_vec(np.convolve(pj, pi), [1.0],
                                            lam, a, b, ap, bp)
                m2[i, j] = double_gauss_vec(pj, Tprime.factors[d][i].coeffs,
                                            lam, a, b, ap, bp)
        V1.append(m1)
        V2.append(m2)
    return PairBlock(T.index, Tprime.index, _combine_dims(V1), _combine_dims(V2))


@dataclass
class InvariantTable:
    """Per-offset 1-D integral tables on a uniform grid of spacing h.

    t1[m+M, i, j] = Ibar(p_j*p_i, 1, lam, [0,h], [mh,(m+1)h])
    t2[m+M, i, j] = Ibar(p_j, p_i, lam, [0,h], [mh,(m+1)h])
    (j is the x-side factor index, i the y-side).  One table serves every
    dimension since all dimensions share the spacing.
    """

    M: int
    h: float
    order: int
    t1: np.ndarray
    t2: np.ndarray


def build_invariant_tables(h: float, params: KernelParams,
                           order: int) -> InvariantTable:
    M = interaction_stencil(params, h)
    refc = [p.coeffs for p in lagrange_factors(order, (0.0, h))]
    offs = np.arange(-M, M + 1)
    ap = offs * h
    bp = ap + h
    k1 = np.empty((2 * M + 1, order + 1, order + 1))
    k2 = np.empty_like(k1)
    for i in range(order + 1):
        # the y-side factor lives on [ap, ap+h]: translate its coefficients
        qi = shift_coeffs(refc[i], -ap)
        for j in range(order + 1):
            k1[:, i, j] = double_gauss_vec(np.convolve(refc[j], refc[i]),
                                           [1.0], params.lam, 0.0, h, ap, bp)
            k2[:, i, j] = double_gauss_vec(refc[j], qi,
                                           params.lam, 0.0, h, ap, bp)
    return InvariantTable(M, h, order, k1, k2)


# ----------------------------------------------------------------------------
# Scatter engines.

class _PatternScatter:
    """Precomputed CSR pattern for a single-box tensor-product DOF grid.

    Row g couples with the DOFs of elements within M cells of g's elements,
    a per-dimension contiguous lattice window, so the CSR slot of any
    (row, col) pair is arithmetic: no sorting during accumulation.
    """

    def __init__(self, mesh: CartesianMesh, dofmap: DofMap, M: int):
        k, dim = mesh.order, mesh.dim
        N = mesh.box_cells[0]
        G = [k * N[d] + 1 for d in range(dim)]
        win_lo, win_len = [], []
        for d in range(dim):
            q = np.arange(G[d])
            e_lo = np.maximum(0, (q + k - 1) // k - 1)
            e_hi = np.minimum(N[d] - 1, q // k)
            lo = k * np.maximum(0, e_lo - M)
            hi = k * np.minimum(N[d] - 1, e_hi + M) + k
            win_lo.append(lo)
            win_len.append(hi - lo + 1)
        q = dofmap.node_lat - k * np.array(mesh.box_origin_lat[0])
        self.q = q.astype(np.int64)
        n = dofmap.n_dofs
        rowlen = np.ones(n, dtype=np.int64)
        for d in range(dim):
            rowlen *= win_len[d][q[:, d]]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(rowlen, out=indptr[1:])
        self.nnz = int(indptr[-1])
        if self.nnz > _NNZ_GUARD:
            raise MemoryError(f"pattern would hold {self.nnz} nonzeros")
        self.indptr = indptr

        # padded per-dim column lattices -> flattened CSR indices
        Ws = [int(win_len[d].max()) for d in range(dim)]
        cs, valids = [], []
        for d in range(dim):
            base = win_lo[d][q[:, d]][:, None] + np.arange(Ws[d])[None, :]
            cs.append(base)
            valids.append(np.arange(Ws[d])[None, :] < win_len[d][q[:, d]][:, None])
        if dim == 2:
            colid = cs[0][:, :, None] * G[1] + cs[1][:, None, :]
            valid = valids[0][:, :, None] & valids[1][:, None, :]
        else:
            colid = (cs[0][:, :, None, None] * G[1]
                     + cs[1][:, None, :, None]) * G[2] + cs[2][:, None, None, :]
            valid = (valids[0][:, :, None, None] & valids[1][:, None, :, None]
                     & valids[2][:, None, None, :])
        self.indices = colid[valid]

        # slot arithmetic: per-row window origins and strides
        self.row_start = indptr[:-1].copy()
        self.lo_r = np.column_stack([win_lo[d][q[:, d]] for d in range(dim)])
        strides = np.ones((n, dim), dtype=np.int64)
        for d in range(dim - 2, -1, -1):
            strides[:, d] = strides[:, d + 1] * win_len[d + 1][q[:, d + 1]]
        self.strides = strides
        self.dim = dim

    def slots(self, rows, cols):
        pos = self.row_start[rows]
        for d in range(self.dim):
            pos = pos + (self.q[cols, d] - self.lo_r[rows, d]) * self.strides[rows, d]
        return pos


class _PatternAccumulator:
    def __init__(self, pattern: _PatternScatter, n_targets: int):
        self.pattern = pattern
        self.data = [np.zeros(pattern.nnz) for _ in range(n_targets)]
        self._slots = [[] for _ in range(n_targets)]
        self._vals = [[] for _ in range(n_targets)]
        self._pending = 0

    def add(self, target: int, rows, cols, vals):
        s = self.pattern.slots(rows, cols)
        self._slots[target].append(s.ravel())
        self._vals[target].append(np.ascontiguousarray(vals).ravel())
        self._pending += s.size
        if self._pending > _FLUSH_ENTRIES:
            self._flush()

    def add_at_slots(self, target: int, slots, vals):
        self._slots[target].append(slots.ravel())
        self._vals[target].append(np.ascontiguousarray(vals).ravel())
        self._pending += slots.size

    def last_slots(self, target: int):
        return self._slots[target][-1]

    def _flush(self):
        for t in range(len(self.data)):
            if self._slots[t]:
                s = np.concatenate(self._slots[t])
                v = np.concatenate(self._vals[t])
                self.data[t] += np.bincount(s, weights=v,
                                            minlength=self.pattern.nnz)
                self._slots[t] = []
                self._vals[t] = []
        self._pending = 0

    def finalize(self, n: int):
        self._flush()
        return [SparseSymMatrix(n, self.pattern.indptr.copy(),
                                self.pattern.indices.copy(), d)
                for d in self.data]


class _TripletAccumulator:
    def __init__(self, n_targets: int):
        self.rows = [[] for _ in range(n_targets)]
        self.cols = [[] for _ in range(n_targets)]
        self.vals = [[] for _ in range(n_targets)]

    def add(self, target, rows, cols, vals):
        r, c = np.broadcast_arrays(rows, cols)
        self.rows[target].append(r.ravel())
        self.cols[target].append(c.ravel())
        self.vals[target].append(np.ascontiguousarray(
            np.broadcast_to(vals, r.shape)).ravel())

    def finalize(self, n):
        out = []
        for t in range(len(self.rows)):
            out.append(SparseSymMatrix.from_triplets(
                n, np.concatenate(self.rows[t]) if self.rows[t] else [],
                np.concatenate(self.cols[t]) if self.cols[t] else [],
                np.concatenate(self.vals[t]) if self.vals[t] else []))
        return out


def _offset_pairs(mesh: CartesianMesh, m):
    """Element index pairs (eT, eP) with lat(eP) = lat(eT) + m."""
    tgt = mesh.elem_lat + np.asarray(m)
    rel = tgt - mesh.lat_min
    ok = np.all((rel >= 0) & (rel < mesh.lat_grid.shape), axis=1)
    eT = np.flatnonzero(ok)
    eP = mesh.lat_grid[tuple(rel[eT].T)]
    keep = eP >= 0
    return eT[keep], eP[keep]


def _offset_iter(M: int, dim: int):
    rng = range(-M, M + 1)
    return itertools.product(*([rng] * dim))


def assemble_system(mesh: CartesianMesh, dofmap: DofMap, params: KernelParams,
                    order: int | None = None, use_invariance: bool = True):
    """Assemble (A, Mbar): stiffness and the (1/s^2)-scaled cross mass matrix.

    Mbar's entries are (1/s^2) * sum over pairs of t2 products, exactly the
    volume-term operator of the load vector, so callers reuse it there.
    """
    if order is not None and order != mesh.order:
        raise ValueError("order does not match mesh")
    k, dim, h = mesh.order, mesh.dim, mesh.spacing
    loc = (k + 1) ** dim
    lam = params.lam
    cT1 = 1.0 / params.delta ** 2
    cT2 = 1.0 / params.s ** 2 - cT1
    cM = 1.0 / params.s ** 2
    M = interaction_stencil(params, h)

    if len(mesh.domain.boxes) == 1:
        acc = _PatternAccumulator(_PatternScatter(mesh, dofmap, M), 2)
        pattern_mode = True
    else:
        acc = _TripletAccumulator(2)
        pattern_mode = False

    table = build_invariant_tables(h, params, k) if use_invariance else None
    refc = [p.coeffs for p in lagrange_factors(k, (0.0, h))]
    conv = [[np.convolve(refc[j], refc[i]) for j in range(k + 1)]
            for i in range(k + 1)]
    ed = dofmap.element_dofs

    for m in _offset_iter(M, dim):
        eT, eP = _offset_pairs(mesh, m)
        if eT.size == 0:
            continue
        if use_invariance:
            b1 = _combine_dims([table.t1[md + M] for md in m])
            b2 = _combine_dims([table.t2[md + M] for md in m])
            v1 = np.broadcast_to(cT1 * b1, (eT.size, loc, loc))
            v2 = np.broadcast_to(cT2 * b2, (eT.size, loc, loc))
            vM = np.broadcast_to(cM * b2, (eT.size, loc, loc))
        else:
            V1d, V2d = [], []
            for d in range(dim):
                delta_d = mesh.elem_corner[eP, d] - mesh.elem_corner[eT, d]
                m1 = np.empty((eT.size, k + 1, k + 1))
                m2 = np.empty_like(m1)
                for i in range(k + 1):
                    qi = shift_coeffs(refc[i], -delta_d)
                    for j in range(k + 1):
                        m1[:, i, j] = double_gauss_vec(
                            conv[i][j], [1.0], lam, 0.0, h, delta_d, delta_d + h)
                        m2[:, i, j] = double_gauss_vec(
                            refc[j], qi, lam, 0.0, h, delta_d, delta_d + h)
                V1d.append(m1)
                V2d.append(m2)
            b1 = _combine_dims(V1d)
            b2 = _combine_dims(V2d)
            v1 = cT1 * b1
            v2 = cT2 * b2
            vM = cM * b2
        dT, dP = ed[eT], ed[eP]
        rows_t1 = dT[:, :, None]
        cols = dT[:, None, :]
        acc.add(0, rows_t1, np.broadcast_to(cols, (eT.size, loc, loc)), v1)
        rows_t2 = dP[:, :, None]
        if pattern_mode:
            s2 = acc.pattern.slots(rows_t2, cols)
            acc.add_at_slots(0, s2, v2)
            acc.add_at_slots(1, s2, vM)
        else:
            acc.add(0, rows_t2, cols, v2)
            acc.add(1, rows_t2, cols, vM)
    A, Mbar = acc.finalize(dofmap.n_dofs)
    return A, Mbar


def assemble_stiffness(mesh, dofmap, params, order: int | None = None,
                       use_invariance: bool = True) -> SparseSymMatrix:
    return assemble_system(mesh, dofmap, params, order, use_invariance)[0]


def assemble_load(mesh: CartesianMesh, dofmap: DofMap, params: KernelParams,
                  order: int | None = None, f=None, g=None, *,
                  mbar: SparseSymMatrix | None = None, faces=None) -> np.ndarray:
    """Load vector: volume term Mbar @ f(nodes) plus the Neumann boundary term.

    f maps an [n, dim] point array to values; g maps (points, outward_normal)
    to values on a boundary face.  Both enter through nodal interpolation.
    The boundary term carries the mandatory factor 2.
    """
    if order is not None and order != mesh.order:
        raise ValueError("order does not match mesh")
    if mbar is None:
        _, mbar = assemble_system(mesh, dofmap, params, order)
    vec = np.zeros(dofmap.n_dofs)
    if f is not None:
        vec += mbar.matvec(np.asarray(f(dofmap.node_coords), dtype=float))
    if g is not None:
        vec += _boundary_load(mesh, dofmap, params, g, faces)
    return vec


def _boundary_load(mesh, dofmap, params, g, faces=None):
    """Neumann term: for each face, 2/s^2 times the g-weighted pair integral
    of every test function against the face, separable per dimension.

    Per candidate element the contribution factorizes into one Ibar per
    tangential dimension (cell factor against face trace factor) and one
    plain Gaussian moment I(p_j, cell_d, level) on the face-normal axis.
    """
    k, dim, h = mesh.order, mesh.dim, mesh.spacing
    lam = params.lam
    M = interaction_stencil(params, h)
    if faces is None:
        faces = boundary_faces(mesh)
    refc = [p.coeffs for p in lagrange_factors(k, (0.0, h))]
    vec = np.zeros(dofmap.n_dofs)
    coef = 2.0 / params.s ** 2

    for face in faces:
        d = face.axis
        tdims = face.tangent_dims
        # candidate elements: lattice window around the face, cutoff applied
        # per dimension exactly as in the stiffness stencil
        lvl = int(round(face.level / h))
        ranges = []
        for m in range(dim):
            if m == d:
                ranges.append(np.arange(lvl - M, lvl + M))
            else:
                flat = int(round(face.extent[tdims.index(m)][0] / h))
                ranges.append(np.arange(flat - M, flat + M + 1))
        lat = np.array(np.meshgrid(*ranges, indexing="ij")).reshape(dim, -1).T
        rel = lat - mesh.lat_min
        ok = np.all((rel >= 0) & (rel < mesh.lat_grid.shape), axis=1)
        els = mesh.lat_grid[tuple(rel[ok].T)]
        els = els[els >= 0]
        if els.size == 0:
            continue
        corner = mesh.elem_corner[els]

        gv = np.asarray(g(face.node_coords, face.outward_normal),
                        dtype=float).reshape((k + 1,) * (dim - 1))
        # per-dimension factor arrays in dim order; tangential dims contract
        # with g below, the normal axis carries the single Gaussian moment
        parts = [None] * dim
        shift = face.level - corner[:, d]
        nrm = np.empty((els.size, k + 1))
        for jx in range(k + 1):
            nrm[:, jx] = int_gauss_vec(refc[jx], 0.0, h, shift, lam)
        parts[d] = nrm
        tang = []
        for t, mdim in enumerate(tdims):
            delta_t = face.extent[t][0] - corner[:, mdim]
            mt = np.empty((els.size, k + 1, k + 1))
            for iy in range(k + 1):
                qi = shift_coeffs(refc[iy], -delta_t)
                for jx in range(k + 1):
                    mt[:, jx, iy] = double_gauss_vec(
                        refc[jx], qi, lam, 0.0, h, delta_t, delta_t + h)
            tang.append(mt)
        if dim == 2:
            parts[tdims[0]] = np.einsum("pji,i->pj", tang[0], gv.ravel())
            vals = np.einsum("pa,pb->pab", parts[0], parts[1])
        else:
            # contract g jointly over both tangential face indices
            Gt = np.einsum("pji,pkl,il->pjk", tang[0], tang[1], gv)
            if d == 0:
                vals = np.einsum("pa,pbc->pabc", nrm, Gt)
            elif d == 1:
                vals = np.einsum("pac,pb->pabc", Gt, nrm)
            else:
                vals = np.einsum("pab,pc->pabc", Gt, nrm)
        np.add.at(vec, dofmap.element_dofs[els],
                  coef * vals.reshape(els.size, -1))
    return vec
