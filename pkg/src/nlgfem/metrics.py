"""Error norms against manufactured solutions and convergence-rate fitting.

Norms are element-wise tensor Gauss quadrature; the uniform mesh lets the
reference basis values be tabulated once and contracted against all element
coefficient blocks in one einsum.  The recovered-gradient norms evaluate the
smoothing operator at every quadrature point; the interior variant drops
points within 2*delta of the boundary, where the uncorrected gradient is
known to lose half an order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .analytic import KernelParams
from .mesh import CartesianMesh, distance_to_boundary_many
from .recovery import RecoveredField


@dataclass
class ErrorReport:
    """Norms from one solve; recovery entries are None when not computed."""

    l2: float
    h1: float
    grad_rec_full: float | None = None
    grad_rec_interior: float | None = None
    grad_rec_corrected: float | None = None

    def __post_init__(self):
        for name in ("l2", "h1", "grad_rec_full", "grad_rec_interior",
                     "grad_rec_corrected"):
            v = getattr(self, name)
            if v is not None and not v >= 0.0:
                raise ValueError(f"{name} must be non-negative")
        if self.h1 < self.l2:
            raise ValueError("h1 must dominate l2")


@dataclass(frozen=True)
class ManufacturedSolution:
    """Exact solution of the local limit problem -laplace(u) + u = f.

    g(x, normal) is the Neumann datum grad(u).n, evaluated on face nodes.
    """

    name: str
    u: object
    grad: object
    f: object
    dim: int

    def g(self, x, normal):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self.grad(x) @ np.asarray(normal, dtype=float)


def _rect_trig():
    def u(x):
        x = np.atleast_2d(x)
        return (np.cos(np.pi * x[:, 0]) * np.cos(np.pi * x[:, 1])
                + x[:, 0] * x[:, 1])

    def grad(x):
        x = np.atleast_2d(x)
        return np.stack([
            -np.pi * np.sin(np.pi * x[:, 0]) * np.cos(np.pi * x[:, 1]) + x[:, 1],
            -np.pi * np.cos(np.pi * x[:, 0]) * np.sin(np.pi * x[:, 1]) + x[:, 0],
        ], axis=1)

    def f(x):
        x = np.atleast_2d(x)
        return ((1.0 + 2.0 * np.pi ** 2)
                * np.cos(np.pi * x[:, 0]) * np.cos(np.pi * x[:, 1])
                + x[:, 0] * x[:, 1])

    return ManufacturedSolution("rect-trig", u, grad, f, 2)


def _lshape_mixed():
    def u(x):
        x = np.atleast_2d(x)
        return (x[:, 0] * np.sin(np.pi * x[:, 1])
                + x[:, 1] * np.sin(np.pi * x[:, 0]))

    def grad(x):
        x = np.atleast_2d(x)
        return np.stack([
            np.sin(np.pi * x[:, 1])
            + np.pi * x[:, 1] * np.cos(np.pi * x[:, 0]),
            np.pi * x[:, 0] * np.cos(np.pi * x[:, 1])
            + np.sin(np.pi * x[:, 0]),
        ], axis=1)

    def f(x):
        x = np.atleast_2d(x)
        return (1.0 + np.pi ** 2) * (x[:, 0] * np.sin(np.pi * x[:, 1])
                                     + x[:, 1] * np.sin(np.pi * x[:, 0]))

    return ManufacturedSolution("lshape-mixed", u, grad, f, 2)


def _cube_trig():
    def u(x):
        x = np.atleast_2d(x)
        return (np.cos(np.pi * x[:, 0]) * np.cos(np.pi * x[:, 1])
                * np.cos(np.pi * x[:, 2]))

    def grad(x):
        x = np.atleast_2d(x)
        c = [np.cos(np.pi * x[:, d]) for d in range(3)]
        s = [np.sin(np.pi * x[:, d]) for d in range(3)]
        return np.stack([-np.pi * s[0] * c[1] * c[2],
                         -np.pi * c[0] * s[1] * c[2],
                         -np.pi * c[0] * c[1] * s[2]], axis=1)

    def f(x):
        return (1.0 + 3.0 * np.pi ** 2) * u(x)

    return ManufacturedSolution("cube-trig", u, grad, f, 3)


_SOLUTIONS = {
    "rect-trig": _rect_trig,
    "lshape-mixed": _lshape_mixed,
    "cube-trig": _cube_trig,
}


def manufactured_solution(name: str) -> ManufacturedSolution:
    try:
        return _SOLUTIONS[name]()
    except KeyError:
        raise ValueError(f"unknown solution {name!r}; "
                         f"choose from {sorted(_SOLUTIONS)}") from None


# ----------------------------------------------------------------------------
# Quadrature tables shared by the norms.

def _ref_quad(mesh: CartesianMesh, quad_order: int):
    """Reference points/weights on [0, h] and basis (value, derivative)
    tables at those points. Returns (pts, wts, B, D) with B[d][i, q]."""
    if quad_order < mesh.order + 2:
        raise ValueError("quad_order must be >= order + 2")
    h = mesh.spacing
    xg, wg = leggauss(quad_order)
    pts = 0.5 * h * (xg + 1.0)
    wts = 0.5 * h * wg
    B = np.stack([p(pts) for p in mesh.ref_factors])
    D = np.stack([p.derivative()(pts) for p in mesh.ref_factors])
    return pts, wts, B, D


def _all_quad_points(mesh, pts):
    """[n_elements, nq^dim, dim] global coordinates of all tensor points."""
    dim = mesh.dim
    grids = np.meshgrid(*([pts] * dim), indexing="ij")
    local = np.stack([g.ravel() for g in grids], axis=1)
    return mesh.elem_corner[:, None, :] + local[None, :, :]


def _uh_values(mesh, coeffs, B):
    k, dim = mesh.order, mesh.dim
    C = coeffs[mesh.dofmap.element_dofs].reshape(
        (mesh.n_elements,) + (k + 1,) * dim)
    if dim == 2:
        return np.einsum("iq,jr,eij->eqr", B, B, C).reshape(mesh.n_elements, -1)
    return np.einsum("iq,jr,ks,eijk->eqrs", B, B, B, C).reshape(
        mesh.n_elements, -1)


def _uh_gradients(mesh, coeffs, B, D):
    k, dim = mesh.order, mesh.dim
    C = coeffs[mesh.dofmap.element_dofs].reshape(
        (mesh.n_elements,) + (k + 1,) * dim)
    out = []
    for d in range(dim):
        tabs = [D if m == d else B for m in range(dim)]
        if dim == 2:
            g = np.einsum("iq,jr,eij->eqr", tabs[0], tabs[1], C)
        else:
            g = np.einsum("iq,jr,ks,eijk->eqrs", tabs[0], tabs[1], tabs[2], C)
        out.append(g.reshape(mesh.n_elements, -1))
    return np.stack(out, axis=2)  # [E, nq^dim, dim]


def _tensor_weights(wts, dim):
    w = wts
    for _ in range(dim - 1):
        w = np.multiply.outer(w, wts)
    return w.ravel()


def l2_error(u_h, exact_u, mesh: CartesianMesh, quad_order: int) -> float:
    """sqrt of the element-summed Gauss quadrature of (u_h - u)^2."""
    pts, wts, B, _ = _ref_quad(mesh, quad_order)
    xs = _all_quad_points(mesh, pts)
    vals = _uh_values(mesh, np.asarray(u_h, dtype=float), B)
    ue = np.asarray(exact_u(xs.reshape(-1, mesh.dim)), dtype=float)
    diff = (vals - ue.reshape(vals.shape)) ** 2
    w = _tensor_weights(wts, mesh.dim)
    return float(math.sqrt(np.sum(diff @ w)))


def h1_error(u_h, exact_u, exact_grad, mesh: CartesianMesh,
             quad_order: int) -> float:
    """Full H^1 norm of the error: sqrt(l2^2 + seminorm^2)."""
    pts, wts, B, D = _ref_quad(mesh, quad_order)
    xs = _all_quad_points(mesh, pts).reshape(-1, mesh.dim)
    coeffs = np.asarray(u_h, dtype=float)
    vals = _uh_values(mesh, coeffs, B)
    grads = _uh_gradients(mesh, coeffs, B, D)
    ue = np.asarray(exact_u(xs), dtype=float).reshape(vals.shape)
    ge = np.asarray(exact_grad(xs), dtype=float).reshape(grads.shape)
    w = _tensor_weights(wts, mesh.dim)
    acc = np.sum(((vals - ue) ** 2) @ w)
    acc += np.sum(np.einsum("eqd,q->e", (grads - ge) ** 2, w))
    return float(math.sqrt(acc))


def recovery_errors(field: RecoveredField, exact_grad, mesh: CartesianMesh,
                    params: KernelParams, quad_order: int):
    """(full, interior, corrected) L^2 gradient errors at quadrature points.

    full:      |grad u - grad S u_h| over all points;
    interior:  same, dropping points with distance to boundary <= 2 delta;
    corrected: |grad u - (grad S u_h - F)| over all points.
    """
    pts, wts, _, _ = _ref_quad(mesh, quad_order)
    xs = _all_quad_points(mesh, pts).reshape(-1, mesh.dim)
    w = np.tile(_tensor_weights(wts, mesh.dim), mesh.n_elements)
    gs = field.gradient_many(xs)
    ge = np.asarray(exact_grad(xs), dtype=float)
    diff2 = np.sum((gs - ge) ** 2, axis=1)
    full = math.sqrt(float(np.sum(w * diff2)))
    interior_mask = distance_to_boundary_many(mesh.domain, xs) > 2.0 * params.delta
    interior = math.sqrt(float(np.sum(w[interior_mask] * diff2[interior_mask])))
    corr = gs - field.correction_many(xs)
    diff2c = np.sum((corr - ge) ** 2, axis=1)
    corrected = math.sqrt(float(np.sum(w * diff2c)))
    return full, interior, corrected


def fit_rates(errors, factors):
    """Per-step convergence rates log(e_{i-1}/e_i) / log(factor_i).

    factors: a scalar refinement factor, a per-step sequence (len(errors)-1),
    or the parameter values themselves (len(errors); factor = v_{i-1}/v_i).
    """
    e = np.asarray(errors, dtype=float)
    if e.size < 2:
        raise ValueError("need at least two errors")
    if np.any(e <= 0):
        raise ValueError("errors must be positive")
    f = np.asarray(factors, dtype=float)
    if f.ndim == 0:
        f = np.full(e.size - 1, float(f))
    elif f.size == e.size:
        f = f[:-1] / f[1:]
    elif f.size != e.size - 1:
        raise ValueError("factors must be scalar, len(errors) or len-1")
    if np.any(f <= 0) or np.any(f == 1.0):
        raise ValueError("refinement factors must be positive and != 1")
    return np.log(e[:-1] / e[1:]) / np.log(f)
