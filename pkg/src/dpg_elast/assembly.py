"""Global dof layout, constrained assembly, Dirichlet data, and sparse solve.

Numbering is element-major for the interior (sigma, u) blocks, then vertex
trace dofs, edge trace bubbles, and edge flux dofs.  Hanging-node coupling
is handled when building the per-side trace entries: the trace on a
constrained side expands directly in the master edge's basis, and a
hanging-vertex value is redistributed onto the master's dofs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .basis import edge_basis_eval, gauss_rule, q_basis_eval
from .local import (SideSegment, TraceEntry, error_representation, local_bmat,
                    local_gram, local_stiffness)
from .material import Material
from .mesh import DegreeMap, Mesh, bilinear_maps


@dataclass
class DofLayout:
    n_dofs: int
    interior_base: dict[int, int]            # element -> first interior dof
    vertex_dof: dict[int, int]               # vertex -> dof of x component
    trace_edges: dict[int, tuple[int, int]]  # owner edge -> (q, bubble base)
    flux_edges: dict[int, tuple[int, int]]   # leaf edge -> (p_E, base)
    hanging: dict[int, int]                  # hanging vertex -> master edge
    pinned: np.ndarray                       # bool mask over all dofs
    element_p: dict[int, int]
    segments: dict[int, list[SideSegment]]   # element -> side segments

    @property
    def n_free(self) -> int:
        return int(self.n_dofs - self.pinned.sum())

    def interior_slices(self, eid: int):
        """(sigma slice, u slice) of an element's interior dofs."""
        p = self.element_p[eid]
        nt = (p + 1) ** 2
        base = self.interior_base[eid]
        return slice(base, base + 3 * nt), slice(base + 3 * nt, base + 5 * nt)


@dataclass
class GlobalSystem:
    E: sp.csr_matrix
    g: np.ndarray
    layout: DofLayout
    x_pinned: np.ndarray = field(default=None)  # values on pinned dofs


def _vertex_entries(mesh: Mesh, layout_vertex: dict, hanging: dict,
                    trace_q: dict, trace_base: dict, v: int) -> list[tuple[int, int, float]]:
    """Express the trace value at a vertex in global dofs: (gx, gy, weight)."""
    if v in layout_vertex:
        gx = layout_vertex[v]
        return [(gx, gx + 1, 1.0)]
    master = hanging[v]
    e = mesh.edges[master]
    q = trace_q[master]
    coords = mesh.edge_coords(master)
    x = np.array(mesh.vertices[v])
    d = coords[1] - coords[0]
    s = 2.0 * ((x - coords[0]) @ d) / (d @ d) - 1.0
    vals = edge_basis_eval(q, np.array([s]))[:, 0]
    out = []
    for gx, gy, w in _vertex_entries(mesh, layout_vertex, hanging, trace_q, trace_base, e.v0):
        out.append((gx, gy, w * vals[0]))
    for gx, gy, w in _vertex_entries(mesh, layout_vertex, hanging, trace_q, trace_base, e.v1):
        out.append((gx, gy, w * vals[1]))
    base = trace_base[master]
    for k in range(2, q + 1):
        out.append((base + 2 * (k - 2), base + 2 * (k - 2) + 1, vals[k]))
    return out


def build_dof_layout(mesh: Mesh, degrees: DegreeMap, bc_spec: str = "dirichlet") -> DofLayout:
    """Global numbering with hanging-node constraints and boundary pinning."""
    if bc_spec != "dirichlet":
        raise ValueError(f"unsupported boundary condition spec {bc_spec!r}")
    active = mesh.active_elements
    element_p = {k: degrees.degree_of(mesh, k) for k in active}

    # classify sides: trace owner edge + flux leaf edges per (element, side)
    side_info: dict[tuple[int, int], tuple[int, list[int]]] = {}
    trace_edges_set: set[int] = set()
    flux_edges_set: set[int] = set()
    for k in active:
        el = mesh.elements[k]
        for s in range(4):
            eid = el.edges[s]
            if mesh.side_is_split(k, s):
                owner = eid
                leaves = mesh.side_subedges(k, s)
            else:
                parent = mesh.edges[eid].parent
                if parent is not None and mesh.active_side_neighbor(parent) is not None:
                    owner = parent      # constrained side, master across the interface
                else:
                    owner = eid
                leaves = [eid]
            side_info[(k, s)] = (owner, leaves)
            trace_edges_set.add(owner)
            flux_edges_set.update(leaves)

    hanging = mesh.hanging_vertices()
    trace_q = {e: degrees.trace_degree(mesh, e) + 1 for e in trace_edges_set}
    flux_p = {e: degrees.edge_degree(mesh, e) for e in flux_edges_set}

    boundary_verts = mesh.boundary_vertices()

    # numbering
    n = 0
    interior_base = {}
    for k in active:
        interior_base[k] = n
        n += 5 * (element_p[k] + 1) ** 2

    vertex_dof = {}
    for e in sorted(trace_edges_set):
        for v in (mesh.edges[e].v0, mesh.edges[e].v1):
            if v not in hanging and v not in vertex_dof:
                vertex_dof[v] = n
                n += 2

    trace_base = {}
    for e in sorted(trace_edges_set):
        trace_base[e] = n
        n += 2 * (trace_q[e] - 1)

    flux_base = {}
    for e in sorted(flux_edges_set):
        flux_base[e] = n
        n += 2 * (flux_p[e] + 1)

    pinned = np.zeros(n, dtype=bool)
    for v, d in vertex_dof.items():
        if v in boundary_verts:
            pinned[d:d + 2] = True
    for e in sorted(trace_edges_set):
        if mesh.edges[e].boundary:
            b = trace_base[e]
            pinned[b:b + 2 * (trace_q[e] - 1)] = True

    # per-element side segments
    segments: dict[int, list[SideSegment]] = {}
    for k in active:
        el = mesh.elements[k]
        segs = []
        for s in range(4):
            owner, leaves = side_info[(k, s)]
            q = trace_q[owner]
            ecoords = mesh.edge_coords(owner)
            entries = []
            for gx, gy, w in _vertex_entries(mesh, vertex_dof, hanging, trace_q,
                                             trace_base, mesh.edges[owner].v0):
                entries.append(TraceEntry(ecoords, q, 0, w, gx, gy))
            for gx, gy, w in _vertex_entries(mesh, vertex_dof, hanging, trace_q,
                                             trace_base, mesh.edges[owner].v1):
                entries.append(TraceEntry(ecoords, q, 1, w, gx, gy))
            tb = trace_base[owner]
            for kk in range(2, q + 1):
                entries.append(TraceEntry(ecoords, q, kk, 1.0,
                                          tb + 2 * (kk - 2), tb + 2 * (kk - 2) + 1))

            nseg = len(leaves)
            for i, leaf in enumerate(leaves):
                t0 = -1.0 + 2.0 * i / nseg
                t1 = -1.0 + 2.0 * (i + 1) / nseg
                p_e = flux_p[leaf]
                fb = flux_base[leaf]
                gdofs = np.array([[fb + 2 * j, fb + 2 * j + 1] for j in range(p_e + 1)])
                # flux sign: +1 when the element's outward normal matches the
                # edge's global normal (rotation of its v0->v1 direction)
                lc = mesh.edge_coords(leaf)
                d = lc[1] - lc[0]
                edge_normal = np.array([d[1], -d[0]])
                coords = mesh.element_coords(k)
                outward = _side_outward_normal(coords, s)
                sign = 1.0 if outward @ edge_normal > 0 else -1.0
                segs.append(SideSegment(side=s, t0=t0, t1=t1,
                                        flux_coords=lc, flux_p=p_e, flux_sign=sign,
                                        flux_gdofs=gdofs, trace_entries=entries))
        segments[k] = segs

    return DofLayout(n_dofs=n, interior_base=interior_base, vertex_dof=vertex_dof,
                     trace_edges={e: (trace_q[e], trace_base[e]) for e in trace_edges_set},
                     flux_edges={e: (flux_p[e], flux_base[e]) for e in flux_edges_set},
                     hanging=hanging, pinned=pinned, element_p=element_p,
                     segments=segments)


def _side_outward_normal(coords: np.ndarray, side: int) -> np.ndarray:
    """Outward normal of a straight side at its midpoint (ccw element)."""
    a = coords[side]
    b = coords[(side + 1) % 4]
    t = b - a
    return np.array([t[1], -t[0]])


def element_full_bmat(mesh: Mesh, layout: DofLayout, material: Material, f,
                      eid: int, delta_p: int):
    """Gram matrix, full local coupling matrix, load, and global dof ids."""
    p = layout.element_p[eid]
    p_tilde = p + delta_p
    coords = mesh.element_coords(eid)
    G = local_gram(coords, p_tilde)
    B_int, skel_cols, lvec = local_bmat(coords, p, p_tilde, material, f,
                                        layout.segments[eid])
    nt = (p + 1) ** 2
    base = layout.interior_base[eid]
    gdofs = list(range(base, base + 5 * nt))
    cols = [B_int]
    skel_ids = sorted(skel_cols)
    if skel_ids:
        cols.append(np.column_stack([skel_cols[i] for i in skel_ids]))
        gdofs.extend(skel_ids)
    Bfull = np.hstack(cols)
    return G, Bfull, lvec, np.array(gdofs, dtype=int)


def assemble(mesh: Mesh, degrees: DegreeMap, material: Material, f,
             layout: DofLayout) -> GlobalSystem:
    """Assemble the SPD DPG system over all dofs (pinned included)."""
    rows, cols, vals = [], [], []
    g = np.zeros(layout.n_dofs)
    for k in mesh.active_elements:
        G, Bfull, lvec, gdofs = element_full_bmat(mesh, layout, material, f, k,
                                                  degrees.delta_p)
        K, fl = local_stiffness(G, Bfull, lvec)
        idx = np.broadcast_to(gdofs, (gdofs.size, gdofs.size))
        rows.append(idx.T.ravel())
        cols.append(idx.ravel())
        vals.append(K.ravel())
        g[gdofs] += fl
    E = sp.coo_matrix((np.concatenate(vals),
                       (np.concatenate(rows), np.concatenate(cols))),
                      shape=(layout.n_dofs, layout.n_dofs)).tocsr()
    return GlobalSystem(E=E, g=g, layout=layout,
                        x_pinned=np.zeros(layout.n_dofs))


def apply_dirichlet(system: GlobalSystem, layout: DofLayout, g_data, mesh: Mesh) -> GlobalSystem:
    """Pin boundary trace dofs to the edgewise L2 projection of g_data."""
    system.x_pinned = dirichlet_values(layout, g_data, mesh)
    return system


def dirichlet_values(layout: DofLayout, g_data, mesh: Mesh) -> np.ndarray:
    """Pinned-dof vector interpolating/projecting the boundary displacement."""
    xp = np.zeros(layout.n_dofs)
    if g_data is not None:
        for v, d in layout.vertex_dof.items():
            if layout.pinned[d]:
                val = np.asarray(g_data(np.array(mesh.vertices[v])), dtype=float)
                xp[d:d + 2] = val
        for e, (q, base) in layout.trace_edges.items():
            if not mesh.edges[e].boundary or q < 2:
                continue
            coords = mesh.edge_coords(e)
            rule = gauss_rule(q + 3)
            pts = 0.5 * (1 - rule.points)[:, None] * coords[0] \
                + 0.5 * (1 + rule.points)[:, None] * coords[1]
            gv = np.array([g_data(pt) for pt in pts])  # (nq, 2)
            vals = edge_basis_eval(q, rule.points)
            v0 = np.asarray(g_data(coords[0]), dtype=float)
            v1 = np.asarray(g_data(coords[1]), dtype=float)
            resid = gv - np.outer(vals[0], v0) - np.outer(vals[1], v1)
            bub = vals[2:]
            M = (bub * rule.weights) @ bub.T
            rhs = (bub * rule.weights) @ resid  # (q-1, 2)
            c = np.linalg.solve(M, rhs)
            for kk in range(q - 1):
                xp[base + 2 * kk: base + 2 * kk + 2] = c[kk]
    return xp


def solve_spd(system: GlobalSystem) -> np.ndarray:
    """Direct sparse solve on the free dofs; returns the full dof vector."""
    layout = system.layout
    free = ~layout.pinned
    E = system.E
    xp = system.x_pinned
    rhs = system.g[free] - E[np.ix_(free, layout.pinned)] @ xp[layout.pinned]
    Eff = E[np.ix_(free, free)].tocsc()
    try:
        lu = splu(Eff)
    except RuntimeError as err:
        raise RuntimeError("sparse factorization failed; system not SPD") from err
    x = xp.copy()
    x[free] = lu.solve(rhs)
    return x


def error_indicators(mesh: Mesh, degrees: DegreeMap, material: Material, f,
                     layout: DofLayout, x: np.ndarray) -> dict[int, float]:
    """Elementwise V-norms of the error representation function."""
    out = {}
    for k in mesh.active_elements:
        G, Bfull, lvec, gdofs = element_full_bmat(mesh, layout, material, f, k,
                                                  degrees.delta_p)
        _, eta = error_representation(G, Bfull, lvec, x[gdofs])
        out[k] = eta
    return out


def eval_element_fields(mesh: Mesh, layout: DofLayout, eid: int,
                        x: np.ndarray, ref_points: np.ndarray):
    """Discrete (sigma, u) on one element at reference points.

    Returns (sigma (nq, 3) as [s11, s12, s22], u (nq, 2)).
    """
    p = layout.element_p[eid]
    nt = (p + 1) ** 2
    base = layout.interior_base[eid]
    vals, _ = q_basis_eval(p, ref_points)  # (nt, nq)
    coef = x[base: base + 5 * nt].reshape(5, nt)
    fields = coef @ vals  # (5, nq)
    return fields[:3].T, fields[3:].T


def solve_condensed(mesh: Mesh, degrees: DegreeMap, material: Material, f,
                    layout: DofLayout, x_pinned: np.ndarray | None = None) -> np.ndarray:
    """Solve with static condensation of the interior (sigma, u) blocks.

    Produces the same solution as the full solve, but factorizes only the
    skeleton coupling and never forms the full sparse matrix, which keeps
    memory bounded on fine high-order meshes.
    """
    if x_pinned is None:
        x_pinned = np.zeros(layout.n_dofs)
    rows, cols, vals = [], [], []
    g = np.zeros(layout.n_dofs)
    recover = {}
    for k in mesh.active_elements:
        G, Bfull, lvec, gdofs = element_full_bmat(mesh, layout, material, f, k,
                                                  degrees.delta_p)
        K, fl = local_stiffness(G, Bfull, lvec)
        p = layout.element_p[k]
        ni = 5 * (p + 1) ** 2
        Kii = K[:ni, :ni]
        Kis = K[:ni, ni:]
        Kss = K[ni:, ni:]
        fi, fs = fl[:ni], fl[ni:]
        Kii_inv_Kis = np.linalg.solve(Kii, Kis)
        Kii_inv_fi = np.linalg.solve(Kii, fi)
        S = Kss - Kis.T @ Kii_inv_Kis
        fcond = fs - Kis.T @ Kii_inv_fi
        sk = gdofs[ni:]
        idx = np.broadcast_to(sk, (sk.size, sk.size))
        rows.append(idx.T.ravel())
        cols.append(idx.ravel())
        vals.append(S.ravel())
        g[sk] += fcond
        recover[k] = (gdofs[:ni], sk, Kii_inv_Kis, Kii_inv_fi)

    Ec = sp.coo_matrix((np.concatenate(vals),
                        (np.concatenate(rows), np.concatenate(cols))),
                       shape=(layout.n_dofs, layout.n_dofs)).tocsr()
    interior = np.zeros(layout.n_dofs, dtype=bool)
    for k in mesh.active_elements:
        sl_s, sl_u = layout.interior_slices(k)
        interior[sl_s] = True
        interior[sl_u] = True
    free = ~layout.pinned & ~interior
    xp = x_pinned
    rhs = g[free] - Ec[np.ix_(free, layout.pinned)] @ xp[layout.pinned]
    try:
        lu = splu(Ec[np.ix_(free, free)].tocsc())
    except RuntimeError as err:
        raise RuntimeError("sparse factorization failed; system not SPD") from err
    x = xp.copy()
    x[free] = lu.solve(rhs)
    for k, (ii, sk, A, bvec) in recover.items():
        x[ii] = bvec - A @ x[sk]
    return x
