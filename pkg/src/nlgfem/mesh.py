"""Cartesian meshes on unions of axis-aligned boxes.

Domains are unions of boxes with disjoint interiors whose corners sit on a
common base grid, so box interfaces align node-for-node.  Meshes are uniform
with spacing 1/n_per_unit in every dimension; degrees of freedom are
tensor-product Lagrange nodes deduplicated through a global integer node
lattice (spacing 1/(n*k)), which makes coincident nodes across box
interfaces identical by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .poly1d import Poly1D, lagrange_factors

_LATTICE_TOL = 1e-9


class BoxDomain:
    """Union of axis-aligned boxes; each box is a tuple of (lo, hi) per dim."""

    def __init__(self, boxes):
        bx = []
        for box in boxes:
            iv = tuple((float(lo), float(hi)) for lo, hi in box)
            if any(not hi > lo for lo, hi in iv):
                raise ValueError("box intervals must have positive length")
            bx.append(iv)
        if not bx:
            raise ValueError("domain needs at least one box")
        dims = {len(iv) for iv in bx}
        if len(dims) != 1 or next(iter(dims)) not in (2, 3):
            raise ValueError("all boxes must share one dimension, 2 or 3")
        self.boxes = tuple(bx)
        self.dim = len(bx[0])
        self._check_disjoint_connected()
        self._brects = None  # lazy boundary rectangles for distance queries

    def _check_disjoint_connected(self):
        n = len(self.boxes)
        adj = [[] for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                olap = [min(self.boxes[i][d][1], self.boxes[j][d][1])
                        - max(self.boxes[i][d][0], self.boxes[j][d][0])
                        for d in range(self.dim)]
                if all(o > _LATTICE_TOL for o in olap):
                    raise ValueError(f"boxes {i} and {j} have overlapping interiors")
                # interface contact: touching in one dim, overlapping in the rest
                touch = sum(1 for o in olap if abs(o) <= _LATTICE_TOL)
                if touch == 1 and all(o > _LATTICE_TOL or abs(o) <= _LATTICE_TOL
                                      for o in olap) and \
                        sum(1 for o in olap if o > _LATTICE_TOL) == self.dim - 1:
                    adj[i].append(j)
                    adj[j].append(i)
        seen = {0}
        stack = [0]
        while stack:
            for j in adj[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        if len(seen) != n:
            raise ValueError("domain boxes must form a connected union")

    def contains(self, x, tol=1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        return any(all(lo - tol <= x[d] <= hi + tol
                       for d, (lo, hi) in enumerate(box))
                   for box in self.boxes)

    def base_resolution(self) -> int:
        """Smallest n with every box corner an integer multiple of 1/n."""
        coords = [c for box in self.boxes for iv in box for c in iv]
        for n in range(1, 4097):
            if all(abs(c * n - round(c * n)) <= _LATTICE_TOL * n for c in coords):
                return n
        raise ValueError("box corners not commensurate with any grid up to 1/4096")


def named_domain(name: str) -> BoxDomain:
    if name == "rect":
        return BoxDomain([(((0.0, 1.0), (0.0, 1.0)))])
    if name == "lshape":
        return BoxDomain([((0.0, 1.0), (0.0, 0.5)),
                          ((0.0, 0.5), (0.5, 1.0))])
    if name == "cube":
        return BoxDomain([((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))])
    raise ValueError(f"unknown domain {name!r}; expected rect, lshape or cube")


@dataclass
class Element:
    """Axis-aligned cell with per-dimension intervals and Lagrange factors."""

    index: int
    intervals: tuple
    factors: list  # factors[d][i] is Poly1D in the global coordinate x_d

    @property
    def volume(self) -> float:
        v = 1.0
        for lo, hi in self.intervals:
            v *= hi - lo
        return v


@dataclass
class DofMap:
    n_dofs: int
    node_coords: np.ndarray      # [n_dofs, dim]
    element_dofs: np.ndarray     # [n_elements, (k+1)^dim], lexicographic local order
    node_lat: np.ndarray         # [n_dofs, dim] int, coords * (n * k)
    box_grids: list              # per box: int array of dof ids, tensor shape


class CartesianMesh:
    """Uniform Cartesian mesh over a BoxDomain."""

    def __init__(self, domain: BoxDomain, n_per_unit: int, order: int):
        if order not in (1, 2, 3):
            raise ValueError("order must be 1, 2 or 3")
        if n_per_unit < 1:
            raise ValueError("n_per_unit must be >= 1")
        self.domain = domain
        self.order = order
        self.n_per_unit = n_per_unit
        self.dim = domain.dim
        self.spacing = 1.0 / n_per_unit

        corners, lats, boxids = [], [], []
        self.box_origin_lat, self.box_cells = [], []
        for b, box in enumerate(domain.boxes):
            counts, origin = [], []
            for lo, hi in box:
                c = (hi - lo) * n_per_unit
                if abs(c - round(c)) > _LATTICE_TOL * n_per_unit or round(c) < 1:
                    raise ValueError(
                        f"box extent {hi - lo} not commensurate with spacing {self.spacing}")
                counts.append(int(round(c)))
                origin.append(int(round(lo * n_per_unit)))
            idx = np.indices(counts).reshape(self.dim, -1).T
            lat = idx + np.array(origin)
            lats.append(lat)
            corners.append(lat / n_per_unit)
            boxids.append(np.full(len(lat), b))
            self.box_origin_lat.append(tuple(origin))
            self.box_cells.append(tuple(counts))
        self.elem_lat = np.concatenate(lats)
        self.elem_corner = np.concatenate(corners)
        self.elem_box = np.concatenate(boxids)
        self.n_elements = len(self.elem_lat)
        self.h = self.spacing * np.sqrt(self.dim)

        # dense element-lattice lookup over the bounding box (-1 = outside)
        self.lat_min = self.elem_lat.min(axis=0)
        shape = self.elem_lat.max(axis=0) - self.lat_min + 1
        self.lat_grid = np.full(shape, -1, dtype=np.int64)
        self.lat_grid[tuple((self.elem_lat - self.lat_min).T)] = np.arange(self.n_elements)

        # shared reference factors on [0, spacing]
        self.ref_factors = lagrange_factors(order, (0.0, self.spacing))
        self._elements = None
        self.dofmap = self._build_dofmap()

    def _build_dofmap(self) -> DofMap:
        k = self.order
        local = np.indices((k + 1,) * self.dim).reshape(self.dim, -1).T
        node_lat = (self.elem_lat[:, None, :] * k + local[None, :, :]).reshape(-1, self.dim)
        uniq, inv = np.unique(node_lat, axis=0, return_inverse=True)
        element_dofs = inv.reshape(self.n_elements, (k + 1) ** self.dim)
        coords = uniq / (self.n_per_unit * k)

        nmin = uniq.min(axis=0)
        grid = np.full(tuple(uniq.max(axis=0) - nmin + 1), -1, dtype=np.int64)
        grid[tuple((uniq - nmin).T)] = np.arange(len(uniq))
        box_grids = []
        for origin, counts in zip(self.box_origin_lat, self.box_cells):
            sl = tuple(slice(o * k - m, o * k - m + c * k + 1)
                       for o, c, m in zip(origin, counts, nmin))
            box_grids.append(grid[sl].copy())
        return DofMap(len(uniq), coords, element_dofs, uniq, box_grids)

    def element_intervals(self, i: int):
        c = self.elem_corner[i]
        return tuple((c[d], c[d] + self.spacing) for d in range(self.dim))

    def element(self, i: int) -> Element:
        iv = self.element_intervals(i)
        return Element(i, iv, [lagrange_factors(self.order, iv[d])
                               for d in range(self.dim)])

    @property
    def elements(self):
        if self._elements is None:
            self._elements = [self.element(i) for i in range(self.n_elements)]
        return self._elements


def build_mesh(domain: BoxDomain, n_per_unit: int, order: int):
    """Build the uniform mesh and its deduplicated DOF map."""
    mesh = CartesianMesh(domain, n_per_unit, order)
    return mesh, mesh.dofmap


@dataclass
class BoundaryFace:
    """Codim-1 element face lying on the domain boundary."""

    axis: int
    level: float
    extent: tuple                # (lo, hi) per tangential dim, in dim order
    outward_normal: np.ndarray
    element: int                 # owning element index
    node_coords: np.ndarray      # [(k+1)^(dim-1), dim], lexicographic tangential order
    trace_factors: list          # per tangential dim: list of Poly1D

    @property
    def tangent_dims(self):
        return tuple(d for d in range(len(self.outward_normal)) if d != self.axis)

    @property
    def measure(self) -> float:
        m = 1.0
        for lo, hi in self.extent:
            m *= hi - lo
        return m


def boundary_faces(mesh: CartesianMesh) -> list[BoundaryFace]:
    """All element faces belonging to exactly one element."""
    dim, k = mesh.dim, mesh.order
    keys, owners = [], []
    for d in range(dim):
        for side in (0, 1):
            tang = np.delete(mesh.elem_lat, d, axis=1)
            lvl = mesh.elem_lat[:, d] + side
            col_d = np.full(mesh.n_elements, d)
            col_s = np.full(mesh.n_elements, side)
            keys.append(np.column_stack([col_d, lvl, tang]))
            owners.append(np.column_stack([np.arange(mesh.n_elements), col_d, col_s]))
    keys = np.concatenate(keys)
    owners = np.concatenate(owners)
    uniq, inv, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    first = np.full(len(uniq), -1, dtype=np.int64)
    first[inv[::-1]] = np.arange(len(inv) - 1, -1, -1)  # first occurrence index

    out = []
    local_1d = np.linspace(0.0, mesh.spacing, k + 1)
    for u in np.nonzero(counts == 1)[0]:
        e, d, side = owners[first[u]]
        corner = mesh.elem_corner[e]
        level = corner[d] + side * mesh.spacing
        tdims = tuple(m for m in range(dim) if m != d)
        extent = tuple((corner[m], corner[m] + mesh.spacing) for m in tdims)
        normal = np.zeros(dim)
        normal[d] = -1.0 if side == 0 else 1.0
        tnodes = np.array(np.meshgrid(*[corner[m] + local_1d for m in tdims],
                                      indexing="ij")).reshape(dim - 1, -1).T
        coords = np.empty((tnodes.shape[0], dim))
        coords[:, d] = level
        for t, m in enumerate(tdims):
            coords[:, m] = tnodes[:, t]
        tf = [lagrange_factors(k, extent[t]) for t in range(dim - 1)]
        out.append(BoundaryFace(int(d), float(level), extent, normal, int(e),
                                coords, tf))
    return out


def _boundary_rects(domain: BoxDomain):
    if domain._brects is None:
        mesh, _ = build_mesh(domain, domain.base_resolution(), 1)
        rects = []
        for f in boundary_faces(mesh):
            lo = np.empty(domain.dim)
            hi = np.empty(domain.dim)
            lo[f.axis] = hi[f.axis] = f.level
            for t, m in enumerate(f.tangent_dims):
                lo[m], hi[m] = f.extent[t]
            rects.append((lo, hi))
        domain._brects = (np.array([r[0] for r in rects]),
                         np.array([r[1] for r in rects]))
    return domain._brects


def distance_to_boundary_many(domain: BoxDomain, pts) -> np.ndarray:
    """Euclidean distance to the domain boundary for points inside the domain."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    lo, hi = _boundary_rects(domain)
    # clamp to each boundary rectangle, take the min distance
    d = pts[:, None, :] - np.clip(pts[:, None, :], lo[None], hi[None])
    return np.sqrt((d * d).sum(axis=2)).min(axis=1)


def distance_to_boundary(domain: BoxDomain, x) -> float:
    x = np.asarray(x, dtype=float)
    if not domain.contains(x, tol=1e-9):
        raise ValueError(f"point {x.tolist()} lies outside the domain")
    return float(distance_to_boundary_many(domain, x[None, :])[0])


def element_quadrature(element, n_points: int):
    """Tensor Gauss-Legendre rule on the cell; returns (points, weights)."""
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    intervals = element.intervals if isinstance(element, Element) else tuple(element)
    xg, wg = leggauss(n_points)
    axes, wts = [], []
    for lo, hi in intervals:
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        axes.append(mid + half * xg)
        wts.append(half * wg)
    dim = len(intervals)
    pts = np.array(np.meshgrid(*axes, indexing="ij")).reshape(dim, -1).T
    w = wts[0]
    for t in wts[1:]:
        w = np.multiply.outer(w, t)
    return pts, w.reshape(-1)
