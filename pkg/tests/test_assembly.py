import numpy as np
import pytest
from scipy.linalg import eigvalsh

from dpg_elast.assembly import (apply_dirichlet, assemble, build_dof_layout,
                                dirichlet_values, error_indicators,
                                eval_element_fields, solve_condensed,
                                solve_spd)
from dpg_elast.basis import edge_basis_eval
from dpg_elast.material import apply_stiffness, make_isotropic
from dpg_elast.mesh import DegreeMap, build_initial_mesh, refine_marked

MAT = make_isotropic(1.0, 0.5)


def make_problem(n=2, p=1, delta_p=2, domain="unit_square"):
    mesh = build_initial_mesh(domain, n)
    degrees = DegreeMap(mesh, p=p, delta_p=delta_p)
    layout = build_dof_layout(mesh, degrees)
    return mesh, degrees, layout


def linear_data(material):
    """Linear displacement with its constant stress (zero body force)."""
    grad = np.array([[0.3, -0.2], [0.5, 0.7]])
    shift = np.array([0.1, -0.4])
    eps = 0.5 * (grad + grad.T)
    sigma = apply_stiffness(material, eps)

    def u(pt):
        return grad @ np.asarray(pt, dtype=float) + shift

    return u, sigma


def test_single_element_dof_counts():
    mesh, degrees, layout = make_problem(n=1, p=1)
    # interior 5*(p+1)^2 = 20, 4 vertices * 2, 4 edges * 2 bubbles,
    # 4 edges * 2*(p+1) flux
    assert layout.n_dofs == 20 + 8 + 8 + 16
    # all trace dofs are pinned on the all-Dirichlet boundary; flux stays
    assert layout.pinned.sum() == 16
    assert layout.n_free == 36


def test_two_by_two_dof_counts():
    mesh, degrees, layout = make_problem(n=2, p=1)
    assert layout.n_dofs == 4 * 20 + 9 * 2 + 12 * 2 + 12 * 4
    assert layout.pinned.sum() == 8 * 2 + 8 * 2
    assert not layout.hanging


def test_hanging_layout():
    mesh = build_initial_mesh("unit_square", 2)
    mesh = refine_marked(mesh, [0])
    degrees = DegreeMap(mesh, p=1)
    layout = build_dof_layout(mesh, degrees)
    assert len(layout.hanging) == 2
    for v in layout.hanging:
        assert v not in layout.vertex_dof


def test_assembled_system_symmetric_spd():
    mesh, degrees, layout = make_problem(n=2, p=2)
    system = assemble(mesh, degrees, MAT, None, layout)
    E = system.E.toarray()
    assert np.max(np.abs(E - E.T)) <= 1e-12 * np.max(np.abs(E))
    free = ~layout.pinned
    w = eigvalsh(E[np.ix_(free, free)])
    assert w.min() > 0.0


def test_dirichlet_vertex_interpolation():
    mesh, degrees, layout = make_problem(n=2, p=2)
    g, _ = linear_data(MAT)
    xp = dirichlet_values(layout, g, mesh)
    for v, d in layout.vertex_dof.items():
        if layout.pinned[d]:
            np.testing.assert_allclose(xp[d:d + 2],
                                       g(mesh.vertices[v]), atol=1e-13)


def test_dirichlet_trace_reproduces_polynomials():
    # quadratic data on a boundary edge is captured exactly at q = 3
    mesh, degrees, layout = make_problem(n=2, p=2)

    def g(pt):
        x, y = pt
        return np.array([x * x - 0.5 * y, 2.0 * y * y + x])

    xp = dirichlet_values(layout, g, mesh)
    for e, (q, base) in layout.trace_edges.items():
        if not mesh.edges[e].boundary:
            continue
        coords = mesh.edge_coords(e)
        ts = np.linspace(-1.0, 1.0, 7)
        pts = 0.5 * (1 - ts)[:, None] * coords[0] + 0.5 * (1 + ts)[:, None] * coords[1]
        vals = edge_basis_eval(q, ts)
        v0 = layout.vertex_dof[mesh.edges[e].v0]
        v1 = layout.vertex_dof[mesh.edges[e].v1]
        for comp in range(2):
            trace = xp[v0 + comp] * vals[0] + xp[v1 + comp] * vals[1]
            for k in range(2, q + 1):
                trace = trace + xp[base + 2 * (k - 2) + comp] * vals[k]
            np.testing.assert_allclose(trace, [g(pt)[comp] for pt in pts],
                                       atol=1e-12)


def solve_linear_patch(mesh, degrees, layout, material):
    g, sigma = linear_data(material)
    system = assemble(mesh, degrees, material, None, layout)
    apply_dirichlet(system, layout, g, mesh)
    x = solve_spd(system)
    return x, g, sigma


def test_patch_test_exact_reproduction():
    # a linear displacement with constant stress lies in the trial space and
    # must be reproduced to roundoff, including across hanging interfaces
    mesh = build_initial_mesh("unit_square", 2)
    mesh = refine_marked(mesh, [0])
    mesh.validate()
    degrees = DegreeMap(mesh, p=1)
    layout = build_dof_layout(mesh, degrees)
    x, g, sigma = solve_linear_patch(mesh, degrees, layout, MAT)
    ref = np.array([[-0.5, 0.2], [0.7, -0.6], [0.0, 0.0]])
    for k in mesh.active_elements:
        sig_h, u_h = eval_element_fields(mesh, layout, k, x, ref)
        from dpg_elast.mesh import bilinear_maps
        phys, _ = bilinear_maps(mesh.element_coords(k), ref)
        for q in range(ref.shape[0]):
            np.testing.assert_allclose(u_h[q], g(phys[q]), atol=1e-9)
            np.testing.assert_allclose(
                sig_h[q], [sigma[0, 0], sigma[0, 1], sigma[1, 1]], atol=1e-9)


def test_indicators_vanish_on_reproduced_solution():
    mesh, degrees, layout = make_problem(n=2, p=1)
    x, _, _ = solve_linear_patch(mesh, degrees, layout, MAT)
    etas = error_indicators(mesh, degrees, MAT, None, layout, x)
    assert set(etas) == set(mesh.active_elements)
    assert max(etas.values()) <= 1e-9


def test_condensed_matches_full_solve():
    mesh = build_initial_mesh("unit_square", 2)
    mesh = refine_marked(mesh, [3])
    degrees = DegreeMap(mesh, p=2)
    layout = build_dof_layout(mesh, degrees)
    g, _ = linear_data(MAT)

    def f(pt):
        return np.array([np.sin(3.0 * pt[0]), np.cos(2.0 * pt[1])])

    system = assemble(mesh, degrees, MAT, f, layout)
    apply_dirichlet(system, layout, g, mesh)
    x_full = solve_spd(system)
    xp = dirichlet_values(layout, g, mesh)
    x_cond = solve_condensed(mesh, degrees, MAT, f, layout, xp)
    scale = np.max(np.abs(x_full))
    np.testing.assert_allclose(x_cond, x_full, atol=1e-10 * scale)


def test_solution_error_decreases_under_refinement():
    from dpg_elast.study import l2_errors, make_benchmark

    bench = make_benchmark("smooth", MAT)
    errs = []
    mesh = build_initial_mesh("unit_square", 2)
    for _ in range(3):
        degrees = DegreeMap(mesh, p=1)
        layout = build_dof_layout(mesh, degrees)
        xp = dirichlet_values(layout, bench.g, mesh)
        x = solve_condensed(mesh, degrees, bench.solver_material, bench.f,
                            layout, xp)
        es, eu, ns, nu = l2_errors(mesh, degrees, layout, x, bench.exact)
        errs.append(np.hypot(es, eu))
        from dpg_elast.mesh import refine_uniform
        mesh = refine_uniform(mesh)
    assert errs[0] > errs[1] > errs[2]


def test_eval_element_fields_constant():
    mesh, degrees, layout = make_problem(n=1, p=1)
    from dpg_elast.basis import ones_coefficients_2d

    x = np.zeros(layout.n_dofs)
    sl_s, sl_u = layout.interior_slices(0)
    ones = ones_coefficients_2d(1)
    nt = 4
    x[sl_s] = np.concatenate([2.0 * ones, -1.0 * ones, 0.5 * ones])
    x[sl_u] = np.concatenate([3.0 * ones, 4.0 * ones])
    pts = np.array([[0.1, -0.7], [0.0, 0.0]])
    sig, u = eval_element_fields(mesh, layout, 0, x, pts)
    np.testing.assert_allclose(sig, [[2.0, -1.0, 0.5]] * 2, atol=1e-14)
    np.testing.assert_allclose(u, [[3.0, 4.0]] * 2, atol=1e-14)


def test_bc_spec_validation():
    mesh = build_initial_mesh("unit_square", 1)
    degrees = DegreeMap(mesh, p=1)
    with pytest.raises(ValueError):
        build_dof_layout(mesh, degrees, bc_spec="neumann")
