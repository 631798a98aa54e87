import numpy as np
import pytest

from nlgfem.analytic import KernelParams, double_gauss_poly
from nlgfem.assembly import (assemble_load, assemble_stiffness,
                             assemble_system, build_invariant_tables,
                             interaction_stencil, pair_stiffness_block)
from nlgfem.mesh import BoxDomain, build_mesh, named_domain
from nlgfem.poly1d import Poly1D, lagrange_factors

import _oracles as orc


def test_stencil_fine_horizon_configuration():
    p = KernelParams(0.01, 2.0, cutoff_eps=1e-16)
    assert np.isclose(p.d_cut, 0.0607, atol=5e-4)
    assert interaction_stencil(p, 1.0 / 128) == 8


def test_stencil_collapses_as_cutoff_approaches_one():
    p = KernelParams(0.01, 2.0, cutoff_eps=0.9999999999999999)
    assert interaction_stencil(p, 1.0 / 128) == 0


def test_stencil_halving_delta_halves_cutoff():
    a = KernelParams(0.02, 2.0)
    b = KernelParams(0.01, 2.0)
    assert a.d_cut == 2.0 * b.d_cut


def test_stencil_rejects_bad_spacing():
    with pytest.raises(ValueError):
        interaction_stencil(KernelParams(0.1), 0.0)


def _brute_pair_blocks(T, Tp, lam, npts=48):
    """Local t1/t2 blocks by tensor Gauss, straight from the definitions."""
    from numpy.polynomial.legendre import leggauss
    dim = len(T.intervals)
    k = len(T.factors[0]) - 1
    x1, w1 = leggauss(npts)

    def cell_data(elem):
        axes, wts, bas = [], [], []
        for d in range(dim):
            lo, hi = elem.intervals[d]
            t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x1
            axes.append(t)
            wts.append(0.5 * (hi - lo) * w1)
            nodes = np.linspace(lo, hi, k + 1)
            bas.append(orc.lagrange_basis_1d(nodes, t))
        P = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], -1)
        W = wts[0]
        for t in wts[1:]:
            W = np.multiply.outer(W, t)
        if dim == 2:
            B = np.einsum("ia,jb->ijab", bas[0], bas[1]).reshape((k + 1) ** 2, -1)
        else:
            B = np.einsum("ia,jb,kc->ijkabc", *bas).reshape((k + 1) ** 3, -1)
        return P, W.ravel(), B

    Pa, Wa, Ba = cell_data(T)
    Pb, Wb, Bb = cell_data(Tp)
    R = np.exp(-lam ** 2 * ((Pa[:, None, :] - Pb[None, :, :]) ** 2).sum(-1))
    t2 = np.einsum("ib,ab,ja,a,b->ij", Bb, R, Ba, Wa, Wb, optimize=True)
    inner = R @ Wb
    t1 = (Ba * (Wa * inner)) @ Ba.T
    return t1, t2


def test_pair_block_matches_tensor_quadrature():
    mesh, _ = build_mesh(named_domain("rect"), 2, 1)
    params = KernelParams(0.2, 2.0)
    T = mesh.element(0)
    blk = pair_stiffness_block(T, T, params)
    t1, t2 = _brute_pair_blocks(T, T, params.lam)
    assert np.all(np.abs(blk.t1 - t1) <= 1e-8 * np.abs(t1))
    assert np.all(np.abs(blk.t2 - t2) <= 1e-8 * np.abs(t2))


def test_pair_block_cross_cells_matches_quadrature():
    mesh, _ = build_mesh(named_domain("rect"), 2, 2)
    params = KernelParams(0.2, 2.0)
    T, Tp = mesh.element(0), mesh.element(3)
    blk = pair_stiffness_block(T, Tp, params)
    t1, t2 = _brute_pair_blocks(T, Tp, params.lam)
    scale = np.abs(t2).max()
    assert np.all(np.abs(blk.t1 - t1) <= 1e-8 * np.maximum(np.abs(t1), 1e-6 * np.abs(t1).max()))
    assert np.all(np.abs(blk.t2 - t2) <= 1e-8 * np.maximum(np.abs(t2), 1e-6 * scale))


def test_pair_block_far_cells_underflow():
    dom = BoxDomain([((0.0, 8.0), (0.0, 1.0))])
    mesh, _ = build_mesh(dom, 1, 1)
    params = KernelParams(0.2, 2.0)
    far = [e for e in range(mesh.n_elements)
           if mesh.elem_corner[e][0] == 7.0][0]
    blk = pair_stiffness_block(mesh.element(0), mesh.element(far), params)
    assert np.all(np.abs(blk.t1) < 1e-300)
    assert np.all(np.abs(blk.t2) < 1e-300)


def test_pair_block_same_cell_t1_symmetric():
    mesh, _ = build_mesh(named_domain("rect"), 2, 3)
    params = KernelParams(0.15, 2.0)
    blk = pair_stiffness_block(mesh.element(1), mesh.element(1), params)
    assert np.allclose(blk.t1, blk.t1.T, rtol=1e-13)
    assert np.allclose(blk.t2, blk.t2.T, rtol=1e-13)


def test_invariant_table_matches_direct_evaluation():
    # tail-offset entries sit at the recursion's absolute round-off floor, so
    # the relative bound applies to entries of meaningful size only
    h = 0.25
    params = KernelParams(0.1, 2.0)
    tab = build_invariant_tables(h, params, 2)
    refc = [p.coeffs for p in lagrange_factors(2, (0.0, h))]
    g1 = np.abs(tab.t1).max()
    g2 = np.abs(tab.t2).max()
    for m in range(-tab.M, tab.M + 1):
        yfac = lagrange_factors(2, (m * h, (m + 1) * h))
        for i in range(3):
            for j in range(3):
                d1 = double_gauss_poly(Poly1D(np.convolve(refc[j], refc[i])),
                                       Poly1D([1.0]), params.lam,
                                       0.0, h, m * h, (m + 1) * h)
                d2 = double_gauss_poly(Poly1D(refc[j]), yfac[i], params.lam,
                                       0.0, h, m * h, (m + 1) * h)
                e1 = abs(tab.t1[m + tab.M, i, j] - d1)
                e2 = abs(tab.t2[m + tab.M, i, j] - d2)
                assert e1 <= 1e-15 * g1
                assert e2 <= 1e-15 * g2
                if abs(d1) >= 1e-2 * g1:
                    assert e1 <= 1e-14 * abs(d1)
                if abs(d2) >= 1e-2 * g2:
                    assert e2 <= 1e-14 * abs(d2)


def test_invariant_table_offset_reflection():
    h = 0.5
    params = KernelParams(0.2, 2.0)
    k = 2
    tab = build_invariant_tables(h, params, k)
    for T in (tab.t1, tab.t2):
        g = np.abs(T).max()
        for m in range(-tab.M, tab.M + 1):
            for i in range(k + 1):
                for j in range(k + 1):
                    a = T[m + tab.M, i, j]
                    b = T[-m + tab.M, k - i, k - j]
                    assert abs(a - b) <= 1e-14 * g
                    if abs(b) >= 1e-2 * g:
                        assert abs(a - b) <= 1e-13 * abs(b)


def test_invariant_table_zero_offset_equals_same_cell_block():
    h = 0.5
    params = KernelParams(0.2, 2.0)
    mesh, _ = build_mesh(named_domain("rect"), 2, 1)
    tab = build_invariant_tables(h, params, 1)
    blk = pair_stiffness_block(mesh.element(0), mesh.element(0), params)
    # 2D block entries are products of per-dimension m=0 table values
    for i in range(4):
        for j in range(4):
            i0, i1 = divmod(i, 2)
            j0, j1 = divmod(j, 2)
            want = tab.t2[tab.M, i0, j0] * tab.t2[tab.M, i1, j1]
            assert np.isclose(blk.t2[i, j], want, rtol=1e-12)


def test_fast_path_equals_generic_path():
    mesh, dofmap = build_mesh(named_domain("rect"), 16, 2)
    params = KernelParams(0.05, 2.0)
    A_f, Mb_f = assemble_system(mesh, dofmap, params, use_invariance=True)
    A_g, Mb_g = assemble_system(mesh, dofmap, params, use_invariance=False)
    for X, Y in ((A_f, A_g), (Mb_f, Mb_g)):
        assert np.array_equal(X.indptr, Y.indptr)
        assert np.array_equal(X.indices, Y.indices)
        scale = np.abs(Y.values).max()
        assert np.abs(X.values - Y.values).max() <= 1e-12 * scale


def test_stiffness_symmetry():
    mesh, dofmap = build_mesh(named_domain("rect"), 8, 1)
    A = assemble_stiffness(mesh, dofmap, KernelParams(0.05, 2.0))
    Ad = A.todense()
    assert np.abs(Ad - Ad.T).max() <= 1e-12 * np.abs(Ad).max()


def test_constant_annihilation_of_diffusion_part():
    mesh, dofmap = build_mesh(named_domain("rect"), 8, 1)
    A, Mbar = assemble_system(mesh, dofmap, KernelParams(0.05, 2.0))
    diff = A.todense() - Mbar.todense()   # (1/delta^2) (T1 - T2)
    ones = np.ones(dofmap.n_dofs)
    assert np.abs(diff @ ones).max() <= 1e-10 * np.abs(diff).max()


def test_energy_identity_against_quadrature():
    mesh, dofmap = build_mesh(named_domain("rect"), 2, 1)
    params = KernelParams(0.2, 2.0)
    A = assemble_stiffness(mesh, dofmap, params)
    rng = np.random.default_rng(7)
    c = rng.standard_normal(dofmap.n_dofs)
    quad = orc.brute_energy(mesh, dofmap, c, params, npts=32)
    alg = c @ A.matvec(c)
    assert abs(alg - quad) <= 1e-6 * abs(quad)


def test_stiffness_positive_definite_samples():
    mesh, dofmap = build_mesh(named_domain("rect"), 4, 1)
    A = assemble_stiffness(mesh, dofmap, KernelParams(0.1, 2.0))
    rng = np.random.default_rng(21)
    for _ in range(100):
        c = rng.standard_normal(dofmap.n_dofs)
        assert c @ A.matvec(c) > 0


def test_load_all_zero_data():
    mesh, dofmap = build_mesh(named_domain("rect"), 2, 1)
    params = KernelParams(0.2, 2.0)
    vec = assemble_load(mesh, dofmap, params,
                        f=lambda x: np.zeros(len(x)),
                        g=lambda x, n: np.zeros(len(x)))
    assert np.array_equal(vec, np.zeros(dofmap.n_dofs))


def test_load_constant_f_matches_quadrature():
    mesh, dofmap = build_mesh(named_domain("rect"), 2, 1)
    params = KernelParams(0.2, 2.0)
    vec = assemble_load(mesh, dofmap, params, f=lambda x: np.ones(len(x)))
    _, Mb = orc.brute_stiffness_mass(mesh, dofmap, params, npts=32)
    want = Mb.T @ np.ones(dofmap.n_dofs)
    assert np.all(np.abs(vec - want) <= 1e-8 * np.abs(want))


def test_load_boundary_term_matches_quadrature():
    mesh, dofmap = build_mesh(named_domain("rect"), 2, 1)
    params = KernelParams(0.2, 2.0)
    vec = assemble_load(mesh, dofmap, params, g=lambda x, n: np.ones(len(x)))
    want = orc.brute_boundary_load(mesh, dofmap, params,
                                   lambda x, n: np.ones(len(x)), npts=32)
    assert np.all(np.abs(vec - want) <= 1e-8 * np.abs(want))


def test_row_sum_identity():
    mesh, dofmap = build_mesh(named_domain("rect"), 4, 1)
    params = KernelParams(0.1, 2.0)
    A, Mbar = assemble_system(mesh, dofmap, params)
    load1 = assemble_load(mesh, dofmap, params,
                          f=lambda x: np.ones(len(x)), mbar=Mbar)
    ones = np.ones(dofmap.n_dofs)
    lhs = A.matvec(ones)
    assert np.all(np.abs(lhs - load1) <= 1e-9 * np.abs(load1))


def test_assembly_deterministic():
    mesh, dofmap = build_mesh(named_domain("lshape"), 4, 2)
    params = KernelParams(0.1, 2.0)
    A1, M1 = assemble_system(mesh, dofmap, params)
    A2, M2 = assemble_system(mesh, dofmap, params)
    assert np.array_equal(A1.values, A2.values)
    assert np.array_equal(A1.indptr, A2.indptr)
    assert np.array_equal(A1.indices, A2.indices)
    assert np.array_equal(M1.values, M2.values)


def test_load_reuses_supplied_cross_matrix():
    mesh, dofmap = build_mesh(named_domain("rect"), 2, 1)
    params = KernelParams(0.2, 2.0)
    _, Mbar = assemble_system(mesh, dofmap, params)
    f = lambda x: x[:, 0] + 2.0 * x[:, 1]
    with_mbar = assemble_load(mesh, dofmap, params, f=f, mbar=Mbar)
    without = assemble_load(mesh, dofmap, params, f=f)
    assert np.allclose(with_mbar, without, rtol=1e-12)
