"""Element-local DPG computations.

Test functions on an element are pairs (tau, v) with tau a symmetric matrix
field (components tau11, tau12, tau22) and v a vector field, each component
in Q_{pt,pt} with pt = p_K + delta_p.  The Gram matrix uses the broken
H(div) x H1 inner product; the trial-test coupling implements the ultraweak
bilinear form restricted to the element.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .basis import edge_basis_eval, gauss_rule, gauss_rule_2d, q_basis_eval
from .material import Material
from .mesh import bilinear_maps

# reference-side parameterizations: point(t) and constant reference tangent
_SIDE_POINT = (
    lambda t: np.column_stack([t, -np.ones_like(t)]),
    lambda t: np.column_stack([np.ones_like(t), t]),
    lambda t: np.column_stack([-t, np.ones_like(t)]),
    lambda t: np.column_stack([-np.ones_like(t), -t]),
)
_SIDE_TANGENT = ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))


@dataclass
class TraceEntry:
    """One global trace function visible on a side segment.

    The scalar profile is basis function `index` of the degree-`q` edge
    basis on the straight edge with endpoints `edge_coords`, scaled by
    `weight` (hanging-node redistribution).  gdof_x/gdof_y are the global
    dofs of its two vector components.
    """

    edge_coords: np.ndarray
    q: int
    index: int
    weight: float
    gdof_x: int
    gdof_y: int


@dataclass
class SideSegment:
    """Portion of an element side carried by one leaf (flux) edge."""

    side: int
    t0: float
    t1: float
    flux_coords: np.ndarray
    flux_p: int
    flux_sign: float
    flux_gdofs: np.ndarray        # shape (flux_p + 1, 2), global dof ids
    trace_entries: list[TraceEntry] = field(default_factory=list)


def test_space_dim(p_tilde: int) -> int:
    return 5 * (p_tilde + 1) ** 2


def _volume_tables(coords: np.ndarray, p: int, p_tilde: int, nq: int):
    rule = gauss_rule_2d(nq)
    _, jac = bilinear_maps(coords, rule.points)
    det = np.linalg.det(jac)
    if np.any(det <= 0.0):
        raise ValueError("nonpositive Jacobian determinant in element quadrature")
    w = rule.weights * det
    tvals, tgrads = q_basis_eval(p_tilde, rule.points)
    jinv = np.linalg.inv(jac)  # (nq, 2, 2)
    # physical gradients: g_phys[a, i, q] = sum_j jinv[q, j, i] * g_ref[a, j, q]
    gphys = np.einsum("qji,ajq->aiq", jinv, tgrads)
    return rule, w, tvals, gphys


def local_gram(coords: np.ndarray, p_tilde: int, nq: int | None = None) -> np.ndarray:
    """Gram matrix of the broken test norm on one element."""
    if nq is None:
        nq = p_tilde + 2
    _, w, vals, g = _volume_tables(coords, 0, p_tilde, nq)
    ns = vals.shape[0]
    M = (vals * w) @ vals.T
    Dxx = (g[:, 0] * w) @ g[:, 0].T
    Dyy = (g[:, 1] * w) @ g[:, 1].T
    Dxy = (g[:, 0] * w) @ g[:, 1].T

    G = np.zeros((5 * ns, 5 * ns))
    b = [slice(i * ns, (i + 1) * ns) for i in range(5)]  # tau11 tau12 tau22 v1 v2
    G[b[0], b[0]] = M + Dxx
    G[b[0], b[1]] = Dxy
    G[b[1], b[0]] = Dxy.T
    G[b[1], b[1]] = 2.0 * M + Dxx + Dyy
    G[b[1], b[2]] = Dxy
    G[b[2], b[1]] = Dxy.T
    G[b[2], b[2]] = M + Dyy
    G[b[3], b[3]] = M + Dxx + Dyy
    G[b[4], b[4]] = M + Dxx + Dyy
    return G


def _edge_param(points: np.ndarray, edge_coords: np.ndarray) -> np.ndarray:
    """Parameter in [-1, 1] of physical points along a straight edge."""
    a, bb = edge_coords[0], edge_coords[1]
    d = bb - a
    return 2.0 * ((points - a) @ d) / (d @ d) - 1.0


def local_bmat(
    coords: np.ndarray,
    p: int,
    p_tilde: int,
    material: Material,
    f,
    segments: list[SideSegment],
    nq: int | None = None,
    nq_edge: int | None = None,
):
    """Trial-test coupling matrix and load vector on one element.

    Returns (B_int, skel_cols, lvec) where B_int couples the element's
    interior trial dofs (sigma then u, component-major) and skel_cols maps
    global skeleton dof -> column of the coupling matrix.
    """
    if nq is None:
        nq = p_tilde + 2
    rule, w, tvals, g = _volume_tables(coords, p, p_tilde, nq)
    uvals, _ = q_basis_eval(p, rule.points)
    ns = tvals.shape[0]
    nt = uvals.shape[0]
    b = [slice(i * ns, (i + 1) * ns) for i in range(5)]

    Mmix = (tvals * w) @ uvals.T          # (ns, nt)
    DxMix = (g[:, 0] * w) @ uvals.T
    DyMix = (g[:, 1] * w) @ uvals.T

    P, Q = material.P, material.Q
    alpha = 0.5 * (P + Q)
    beta = 0.5 * (Q - P)

    B = np.zeros((5 * ns, 5 * nt))
    c = [slice(i * nt, (i + 1) * nt) for i in range(5)]  # s11 s12 s22 u1 u2
    # (A sigma, tau)
    B[b[0], c[0]] += alpha * Mmix
    B[b[0], c[2]] += beta * Mmix
    B[b[1], c[1]] += 2.0 * P * Mmix
    B[b[2], c[0]] += beta * Mmix
    B[b[2], c[2]] += alpha * Mmix
    # (u, div tau)
    B[b[0], c[3]] += DxMix
    B[b[1], c[3]] += DyMix
    B[b[1], c[4]] += DxMix
    B[b[2], c[4]] += DyMix
    # (sigma, grad v)
    B[b[3], c[0]] += DxMix
    B[b[3], c[1]] += DyMix
    B[b[4], c[1]] += DxMix
    B[b[4], c[2]] += DyMix

    # load (f, v)
    lvec = np.zeros(5 * ns)
    if f is not None:
        phys, _ = bilinear_maps(coords, rule.points)
        fv = np.array([f(pt) for pt in phys])  # (nq, 2)
        lvec[b[3]] = tvals @ (w * fv[:, 0])
        lvec[b[4]] = tvals @ (w * fv[:, 1])

    # skeleton terms
    skel_cols: dict[int, np.ndarray] = {}

    def col(gdof: int) -> np.ndarray:
        if gdof not in skel_cols:
            skel_cols[gdof] = np.zeros(5 * ns)
        return skel_cols[gdof]

    for seg in segments:
        q_tr = max([e.q for e in seg.trace_entries], default=1)
        ne = nq_edge if nq_edge is not None else max(p_tilde, q_tr) + 3
        erule = gauss_rule(ne)
        half = 0.5 * (seg.t1 - seg.t0)
        ts = 0.5 * (seg.t0 + seg.t1) + half * erule.points
        ref_pts = _SIDE_POINT[seg.side](ts)
        phys, jac = bilinear_maps(coords, ref_pts)
        tan_ref = _SIDE_TANGENT[seg.side]
        tang = jac[:, :, 0] * tan_ref[0] + jac[:, :, 1] * tan_ref[1]  # (ne, 2)
        speed = np.hypot(tang[:, 0], tang[:, 1])
        normal = np.column_stack([tang[:, 1], -tang[:, 0]]) / speed[:, None]
        ws = erule.weights * half * speed  # arc-length weights

        svals, _ = q_basis_eval(p_tilde, ref_pts)  # test scalars on the side

        # -<u_hat, tau n>
        for entry in seg.trace_entries:
            s = _edge_param(phys, entry.edge_coords)
            prof = edge_basis_eval(entry.q, s)[entry.index] * entry.weight
            wn1 = ws * prof * normal[:, 0]
            wn2 = ws * prof * normal[:, 1]
            cx = col(entry.gdof_x)
            cy = col(entry.gdof_y)
            cx[b[0]] -= svals @ wn1
            cx[b[1]] -= svals @ wn2
            cy[b[1]] -= svals @ wn1
            cy[b[2]] -= svals @ wn2

        # -<v, sigma_hat_n>
        s = _edge_param(phys, seg.flux_coords)
        fvals = edge_basis_eval(seg.flux_p, s)
        for i in range(seg.flux_p + 1):
            wf = ws * fvals[i] * seg.flux_sign
            gx, gy = seg.flux_gdofs[i]
            col(gx)[b[3]] -= svals @ wf
            col(gy)[b[4]] -= svals @ wf

    return B, skel_cols, lvec


def local_stiffness(G: np.ndarray, Bfull: np.ndarray, lvec: np.ndarray):
    """Condensed SPD element matrix B' G^{-1} B and load B' G^{-1} l."""
    try:
        cf = cho_factor(G, lower=True)
    except np.linalg.LinAlgError as err:
        raise RuntimeError("Gram matrix is not positive definite") from err
    GinvB = cho_solve(cf, Bfull)
    K = Bfull.T @ GinvB
    K = 0.5 * (K + K.T)
    fl = Bfull.T @ cho_solve(cf, lvec)
    return K, fl


def error_representation(G: np.ndarray, Bfull: np.ndarray, lvec: np.ndarray, x_loc: np.ndarray):
    """Riesz representative of the local residual and its V-norm."""
    resid = lvec - Bfull @ x_loc
    cf = cho_factor(G, lower=True)
    e = cho_solve(cf, resid)
    eta = float(np.sqrt(max(e @ G @ e, 0.0)))
    return e, eta
