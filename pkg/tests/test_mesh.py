import itertools

import numpy as np
import pytest

from nlgfem.mesh import (BoxDomain, boundary_faces, build_mesh,
                         distance_to_boundary, distance_to_boundary_many,
                         element_quadrature, named_domain)


def test_rect_n2_order1_counts():
    mesh, dofmap = build_mesh(named_domain("rect"), 2, 1)
    assert mesh.n_elements == 4
    assert dofmap.n_dofs == 9


def test_lshape_n4_order1_counts():
    mesh, dofmap = build_mesh(named_domain("lshape"), 4, 1)
    assert mesh.n_elements == 12
    assert dofmap.n_dofs == 21


def test_cube_n2_order2_counts():
    mesh, dofmap = build_mesh(named_domain("cube"), 2, 2)
    assert mesh.n_elements == 8
    assert dofmap.n_dofs == 125


@pytest.mark.parametrize("order", [1, 2, 3])
@pytest.mark.parametrize("n", [1, 3])
def test_single_box_dof_count_formula(order, n):
    dom = BoxDomain([((0.0, 2.0), (0.0, 1.0))])
    _, dofmap = build_mesh(dom, n, order)
    assert dofmap.n_dofs == (order * n * 2 + 1) * (order * n * 1 + 1)


def test_incommensurate_box_raises():
    dom = BoxDomain([((0.0, 0.7), (0.0, 1.0))])
    with pytest.raises(ValueError):
        build_mesh(dom, 2, 1)


def test_invalid_order_raises():
    with pytest.raises(ValueError):
        build_mesh(named_domain("rect"), 2, 4)


def test_mesh_h_is_cell_diagonal():
    mesh, _ = build_mesh(named_domain("rect"), 4, 1)
    assert np.isclose(mesh.h, 0.25 * np.sqrt(2.0), rtol=1e-15)
    mesh3, _ = build_mesh(named_domain("cube"), 2, 1)
    assert np.isclose(mesh3.h, 0.5 * np.sqrt(3.0), rtol=1e-15)


def test_element_dofs_deduplicated_across_box_interface():
    _, dofmap = build_mesh(named_domain("lshape"), 2, 2)
    # coincident nodes got one global index: all stored coordinates distinct
    coords = dofmap.node_coords
    assert len(np.unique(np.round(coords * 1e12).astype(np.int64), axis=0)) \
        == dofmap.n_dofs
    # every global index is referenced by at least one element
    used = np.unique(dofmap.element_dofs)
    assert np.array_equal(used, np.arange(dofmap.n_dofs))


def test_rect_n1_boundary_faces_and_normals():
    mesh, _ = build_mesh(named_domain("rect"), 1, 1)
    faces = boundary_faces(mesh)
    assert len(faces) == 4
    normals = sorted(tuple(f.outward_normal) for f in faces)
    assert normals == [(-1.0, 0.0), (0.0, -1.0), (0.0, 1.0), (1.0, 0.0)]


@pytest.mark.parametrize("n", [2, 4, 6])
def test_lshape_boundary_length(n):
    mesh, _ = build_mesh(named_domain("lshape"), n, 1)
    total = sum(f.measure for f in boundary_faces(mesh))
    assert np.isclose(total, 4.0, rtol=1e-13)


def test_cube_n2_boundary_area():
    mesh, _ = build_mesh(named_domain("cube"), 2, 1)
    faces = boundary_faces(mesh)
    assert len(faces) == 24
    assert np.isclose(sum(f.measure for f in faces), 6.0, rtol=1e-13)


@pytest.mark.parametrize("name,n", [("rect", 3), ("lshape", 2), ("cube", 2)])
def test_face_normals_point_outward(name, n):
    dom = named_domain(name)
    mesh, _ = build_mesh(dom, n, 1)
    for f in boundary_faces(mesh):
        center = np.zeros(mesh.dim)
        center[f.axis] = f.level
        for t, m in enumerate(f.tangent_dims):
            lo, hi = f.extent[t]
            center[m] = 0.5 * (lo + hi)
        outside = center + 1e-6 * f.outward_normal
        assert not dom.contains(outside)
        inside = center - 1e-6 * f.outward_normal
        assert dom.contains(inside)


def test_interior_faces_excluded():
    mesh, _ = build_mesh(named_domain("rect"), 2, 1)
    faces = boundary_faces(mesh)
    assert len(faces) == 8
    for f in faces:
        assert f.level in (0.0, 1.0)


def test_distance_center_of_square():
    assert distance_to_boundary(named_domain("rect"), (0.5, 0.5)) == 0.5


def test_distance_on_boundary():
    assert distance_to_boundary(named_domain("rect"), (0.0, 0.3)) == 0.0


def test_distance_lshape_notch():
    d = distance_to_boundary(named_domain("lshape"), (0.6, 0.4))
    assert np.isclose(d, 0.1, rtol=0, atol=1e-14)


def test_distance_outside_raises():
    with pytest.raises(ValueError):
        distance_to_boundary(named_domain("lshape"), (0.9, 0.9))


def test_distance_many_matches_scalar():
    dom = named_domain("lshape")
    pts = np.array([[0.6, 0.4], [0.25, 0.25], [0.5, 0.5], [0.1, 0.9]])
    many = distance_to_boundary_many(dom, pts)
    for x, d in zip(pts, many):
        assert np.isclose(d, distance_to_boundary(dom, x), rtol=0, atol=1e-14)


def test_quadrature_midpoint_rule():
    pts, w = element_quadrature(((0.0, 1.0), (0.0, 1.0)), 1)
    assert np.allclose(pts, [[0.5, 0.5]])
    assert np.allclose(w, [1.0])


def test_quadrature_weights_sum_to_volume():
    rng = np.random.default_rng(6)
    for _ in range(10):
        iv = tuple((a, a + ln) for a, ln in
                   zip(rng.uniform(-1, 1, 3), rng.uniform(0.1, 2.0, 3)))
        vol = np.prod([hi - lo for lo, hi in iv])
        _, w = element_quadrature(iv, 3)
        assert np.isclose(w.sum(), vol, rtol=1e-14)


def test_quadrature_cubic_exactness():
    pts, w = element_quadrature(((0.0, 1.0),), 2)
    assert abs(w @ pts[:, 0] ** 3 - 0.25) <= 1e-15


def test_quadrature_from_mesh_element():
    mesh, _ = build_mesh(named_domain("rect"), 4, 2)
    pts, w = element_quadrature(mesh.element(5), 2)
    assert np.isclose(w.sum(), 0.25 ** 2, rtol=1e-14)
    assert pts.shape == (4, 2)


def test_quadrature_rejects_zero_points():
    with pytest.raises(ValueError):
        element_quadrature(((0.0, 1.0),), 0)


@pytest.mark.parametrize("name,order", [("rect", 1), ("lshape", 2), ("cube", 1)])
def test_global_partition_of_unity(name, order):
    dom = named_domain(name)
    mesh, dofmap = build_mesh(dom, 2, order)
    rng = np.random.default_rng(17)
    pts = []
    while len(pts) < 100:
        x = rng.uniform(0, 1, mesh.dim)
        if dom.contains(x):
            pts.append(x)
    for x in pts:
        e = next(i for i in range(mesh.n_elements)
                 if all(lo - 1e-12 <= x[d] <= hi + 1e-12
                        for d, (lo, hi) in enumerate(mesh.element_intervals(i))))
        elem = mesh.element(e)
        total = 0.0
        for combo in itertools.product(range(order + 1), repeat=mesh.dim):
            val = 1.0
            for d, m in enumerate(combo):
                val *= elem.factors[d][m].evaluate(x[d])
            total += val
        assert abs(total - 1.0) <= 1e-12


def test_named_domain_unknown_raises():
    with pytest.raises(ValueError):
        named_domain("annulus")


def test_box_domain_rejects_overlapping_interiors():
    with pytest.raises(ValueError):
        BoxDomain([((0.0, 1.0), (0.0, 1.0)), ((0.5, 1.5), (0.0, 1.0))])


def test_box_domain_rejects_disconnected_union():
    with pytest.raises(ValueError):
        BoxDomain([((0.0, 1.0), (0.0, 1.0)), ((2.0, 3.0), (0.0, 1.0))])
