"""Second method: mean trace constraint, rank-one structure, bordered solve.

The second formulation appends a scalar unknown enforcing the zero mean of
tr(A sigma) and a scalar test component.  The resulting stiffness matrix is
the first method's matrix plus a rank-one term, bordered by one extra row
and column; the solve needs one factorization of the base matrix and three
applications of its inverse.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import cho_factor, cho_solve
from scipy.sparse.linalg import splu

from .assembly import DofLayout, GlobalSystem, element_full_bmat
from .basis import gauss_rule_2d, q_basis_eval
from .material import Material
from .mesh import DegreeMap, Mesh, bilinear_maps


@dataclass
class BorderedSystem:
    """Free-dof data of the bordered system [[E + ell ell', c], [c', d]]."""

    E: sp.spmatrix | np.ndarray
    g: np.ndarray
    ell: np.ndarray
    c: np.ndarray
    d: float


def ell_vector(mesh: Mesh, degrees: DegreeMap, material: Material,
               layout: DofLayout) -> np.ndarray:
    """Rank-one vector: ell_j is the scaled mean of tr(A sigma_j).

    Zero except on the diagonal stress dofs, where the entry is
    (Q / Q0) times the integral of the scalar basis function.
    """
    ell = np.zeros(layout.n_dofs)
    scale = material.Q / material.Q0
    for k in mesh.active_elements:
        p = layout.element_p[k]
        coords = mesh.element_coords(k)
        rule = gauss_rule_2d(p + 2)
        _, jac = bilinear_maps(coords, rule.points)
        w = rule.weights * np.linalg.det(jac)
        vals, _ = q_basis_eval(p, rule.points)
        integrals = scale * (vals @ w)
        nt = (p + 1) ** 2
        base = layout.interior_base[k]
        ell[base: base + nt] += integrals                      # sigma_11 block
        ell[base + 2 * nt: base + 3 * nt] += integrals         # sigma_22 block
    return ell


def _alpha_rhs(coords: np.ndarray, p_tilde: int, material: Material) -> np.ndarray:
    """Load of the scalar unknown's test problem on one element.

    Pairs each test stress against the scaled identity: nonzero only on
    the diagonal test-stress blocks.
    """
    rule = gauss_rule_2d(p_tilde + 2)
    _, jac = bilinear_maps(coords, rule.points)
    w = rule.weights * np.linalg.det(jac)
    vals, _ = q_basis_eval(p_tilde, rule.points)
    ns = vals.shape[0]
    scale = material.Q / material.Q0
    r = np.zeros(5 * ns)
    integrals = scale * (vals @ w)
    r[:ns] = integrals              # tau_11
    r[2 * ns: 3 * ns] = integrals   # tau_22
    return r


def border_terms(mesh: Mesh, degrees: DegreeMap, material: Material, f,
                 layout: DofLayout) -> tuple[np.ndarray, float]:
    """Border column c and diagonal d of the bordered system.

    The optimal test function of the scalar unknown is computed per element
    by reusing the local Gram factorizations; its scalar component is zero,
    so c is the plain bilinear form paired against that test function.
    """
    c = np.zeros(layout.n_dofs)
    d = 0.0
    for k in mesh.active_elements:
        G, Bfull, _, gdofs = element_full_bmat(mesh, layout, material, f, k,
                                               degrees.delta_p)
        p = layout.element_p[k]
        r = _alpha_rhs(mesh.element_coords(k), p + degrees.delta_p, material)
        t = cho_solve(cho_factor(G, lower=True), r)
        c[gdofs] += Bfull.T @ t
        d += float(r @ t)
    return c, d


def build_bordered_system(mesh: Mesh, degrees: DegreeMap, material: Material,
                          f, layout: DofLayout,
                          system: GlobalSystem) -> BorderedSystem:
    """Restrict the assembled system plus border data to the free dofs."""
    ell = ell_vector(mesh, degrees, material, layout)
    c, d = border_terms(mesh, degrees, material, f, layout)
    free = ~layout.pinned
    E = system.E[np.ix_(free, free)]
    return BorderedSystem(E=E, g=system.g[free], ell=ell[free], c=c[free], d=d)


def solve_second_method(bordered: BorderedSystem) -> tuple[np.ndarray, float]:
    """Solve the bordered system with a rank-one update of the base matrix.

    Uses one factorization of E and three solves.  Returns the free-dof
    vector and the scalar multiplier.
    """
    E, g, ell, c, d = (bordered.E, bordered.g, bordered.ell, bordered.c,
                       bordered.d)
    if sp.issparse(E):
        lu = splu(E.tocsc())
        esolve = lu.solve
    else:
        cf = cho_factor(np.asarray(E), lower=True)
        esolve = lambda v: cho_solve(cf, v)

    w = esolve(ell)
    a = 1.0 / (1.0 + ell @ w)

    def etilde_solve(v):
        return esolve(v) - a * w * (w @ v)

    x_c = etilde_solve(c)
    x_g = etilde_solve(g)
    denom = d - c @ x_c
    if denom == 0.0:
        raise RuntimeError("bordered system is singular: zero Schur complement")
    alpha = -(c @ x_g) / denom
    x = x_g - x_c * alpha
    return x, float(alpha)


def solve_second(mesh: Mesh, degrees: DegreeMap, material: Material, f,
                 layout: DofLayout, system: GlobalSystem) -> tuple[np.ndarray, float]:
    """Second-method solve on homogeneous boundary data.

    Returns the full dof vector (pinned entries zero) and the multiplier.
    """
    bordered = build_bordered_system(mesh, degrees, material, f, layout, system)
    x_free, alpha = solve_second_method(bordered)
    x = np.zeros(layout.n_dofs)
    x[~layout.pinned] = x_free
    return x, alpha
