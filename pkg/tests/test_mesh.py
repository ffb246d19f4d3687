import numpy as np
import pytest

from dpg_elast.mesh import (DegreeMap, build_initial_mesh, reference_map,
                            refine_marked, refine_uniform)


def test_unit_square_counts():
    mesh = build_initial_mesh("unit_square", 2)
    assert len(mesh.vertices) == 9
    assert len(mesh.elements) == 4
    assert len(mesh.edges) == 12
    assert sum(e.boundary for e in mesh.edges) == 8
    mesh.validate()


def test_l_shape_counts():
    mesh = build_initial_mesh("l_shape", 1)
    assert len(mesh.elements) == 3
    assert len(mesh.vertices) == 8
    assert sum(e.boundary for e in mesh.edges) == 8
    mesh.validate()
    # the reentrant corner vertex is on the boundary
    assert any(np.allclose(v, (0.0, 0.0)) for v in mesh.vertices)


def test_invalid_domain():
    with pytest.raises(ValueError):
        build_initial_mesh("triangle", 1)
    with pytest.raises(ValueError):
        build_initial_mesh("unit_square", 0)


def test_reference_map_jacobian():
    mesh = build_initial_mesh("unit_square", 4)
    pt, jac = reference_map(mesh, 0, (0.0, 0.0))
    assert np.linalg.det(jac) == pytest.approx(1.0 / 64.0, abs=1e-15)
    pt, jac = reference_map(mesh, 0, (-1.0, -1.0))
    np.testing.assert_allclose(pt, mesh.element_coords(0)[0], atol=1e-15)


def test_reference_map_sheared():
    mesh = build_initial_mesh("unit_square", 1)
    mesh.vertices = [(0.0, 0.0), (1.0, 0.0), (1.5, 1.0), (0.5, 1.0)]
    pt, jac = reference_map(mesh, 0, (0.0, 0.0))
    np.testing.assert_allclose(pt, [0.75, 0.5], atol=1e-15)
    assert np.linalg.det(jac) > 0.0


def test_uniform_refinement():
    mesh = build_initial_mesh("unit_square", 1)
    fine = refine_uniform(mesh)
    assert len(fine.active_elements) == 4
    assert not fine.elements[0].active
    assert len(mesh.active_elements) == 1  # original untouched
    fine.validate()
    assert not fine.hanging_vertices()
    area = sum(abs(np.linalg.det(reference_map(fine, k, (0, 0))[1])) * 4.0
               for k in fine.active_elements)
    assert area == pytest.approx(1.0, abs=1e-14)


def test_marked_refinement_hanging():
    mesh = build_initial_mesh("unit_square", 2)
    fine = refine_marked(mesh, [0])
    fine.validate()
    assert len(fine.active_elements) == 7
    hang = fine.hanging_vertices()
    # element 0 has two interior sides, each contributing a hanging vertex
    assert len(hang) == 2
    for v, eid in hang.items():
        mid = 0.5 * (np.array(fine.vertices[fine.edges[eid].v0])
                     + np.array(fine.vertices[fine.edges[eid].v1]))
        np.testing.assert_allclose(fine.vertices[v], mid, atol=1e-14)


def test_closure_keeps_one_irregular():
    mesh = build_initial_mesh("unit_square", 2)
    fine = refine_marked(mesh, [0])
    child = fine.elements[0].children[2]  # touches both interior interfaces
    finer = refine_marked(fine, [child])
    finer.validate()
    levels = {}
    for k in finer.active_elements:
        for s in range(4):
            for eid in finer.side_subedges(k, s):
                levels.setdefault(eid, []).append(finer.elements[k].level)
    for eid, lv in levels.items():
        if len(lv) == 2:
            assert abs(lv[0] - lv[1]) <= 1


def test_refine_inactive_raises():
    mesh = build_initial_mesh("unit_square", 1)
    fine = refine_uniform(mesh)
    with pytest.raises(ValueError):
        refine_marked(fine, [0])


def test_boundary_vertices():
    mesh = build_initial_mesh("unit_square", 2)
    bnd = mesh.boundary_vertices()
    interior = [v for v, xy in enumerate(mesh.vertices)
                if 0.0 < xy[0] < 1.0 and 0.0 < xy[1] < 1.0]
    assert len(bnd) == 8
    assert all(v not in bnd for v in interior)


def test_dump_format():
    mesh = build_initial_mesh("unit_square", 2)
    degrees = DegreeMap(mesh, p=3)
    text = mesh.dump(degrees)
    lines = text.strip().split("\n")
    vlines = [ln for ln in lines if ln.startswith("v ")]
    elines = [ln for ln in lines if ln.startswith("e ")]
    assert len(vlines) == 9
    assert len(elines) == 4
    for ln in elines:
        parts = ln.split()
        assert len(parts) == 6
        assert parts[5] == "3"
        assert all(0 <= int(t) < 9 for t in parts[1:5])
    for ln in vlines:
        x, y = map(float, ln.split()[1:])
        assert 0.0 <= x <= 1.0 and 0.0 <= y <= 1.0


def test_degree_map_inheritance():
    mesh = build_initial_mesh("unit_square", 1)
    degrees = DegreeMap(mesh, p=2, delta_p=2)
    fine = refine_uniform(mesh)
    for k in fine.active_elements:
        assert degrees.degree_of(fine, k) == 2
    degrees.increment(fine.active_elements[0], fine)
    assert degrees.degree_of(fine, fine.active_elements[0]) == 3


def test_degree_map_edge_rules():
    mesh = build_initial_mesh("unit_square", 2)
    degrees = DegreeMap(mesh, p=1)
    degrees.set_degree(0, 4)
    el = mesh.elements[0]
    for s in range(4):
        assert degrees.edge_degree(mesh, el.edges[s]) == 4
    far = mesh.elements[3].edges  # element diagonal from 0 shares no edge
    shared = set(el.edges)
    only_far = [e for e in far if e not in shared]
    assert any(degrees.edge_degree(mesh, e) == 1 for e in only_far)


def test_degree_map_validation():
    mesh = build_initial_mesh("unit_square", 1)
    with pytest.raises(ValueError):
        DegreeMap(mesh, p=0)
    with pytest.raises(ValueError):
        DegreeMap(mesh, p=1, delta_p=0)
    degrees = DegreeMap(mesh, p=1)
    with pytest.raises(ValueError):
        degrees.set_degree(0, 0)
