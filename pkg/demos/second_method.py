"""The trace-constrained second formulation and its rank-one structure.

The second formulation adds a scalar unknown enforcing a zero mean of
tr(A sigma).  Its stiffness matrix is the first method's matrix plus a
rank-one term, bordered by one extra row and column, so the solve costs
one factorization of the base matrix plus three back-substitutions.  On
a compatible problem the multiplier vanishes and both methods return the
same solution.
"""
import numpy as np

from dpg_elast import (assemble, build_dof_layout, make_benchmark,
                       solve_second, solve_spd)
from dpg_elast.material import make_isotropic
from dpg_elast.mesh import DegreeMap, build_initial_mesh
from dpg_elast.rankone import build_bordered_system, ell_vector


def main():
    material = make_isotropic(1.0, 0.5)
    bench = make_benchmark("smooth", material)
    mesh = build_initial_mesh("unit_square", 2)
    degrees = DegreeMap(mesh, p=2)
    layout = build_dof_layout(mesh, degrees)
    system = assemble(mesh, degrees, bench.solver_material, bench.f, layout)

    x1 = solve_spd(system)
    x2, alpha = solve_second(mesh, degrees, bench.solver_material, bench.f,
                             layout, system)

    norm = np.linalg.norm(x1)
    print(f"free dofs: {layout.n_free}")
    print(f"scalar multiplier alpha = {alpha:.3e} (vanishes on compatible data)")
    print(f"relative difference between the methods: "
          f"{np.linalg.norm(x1 - x2) / norm:.3e}")

    ell = ell_vector(mesh, degrees, bench.solver_material, layout)
    print(f"constraint value ell.x = {ell @ x2:.3e} "
          f"(the second method enforces zero mean of tr(A sigma))")

    bordered = build_bordered_system(mesh, degrees, bench.solver_material,
                                     bench.f, layout, system)
    m = bordered.g.size
    big = np.zeros((m + 1, m + 1))
    big[:m, :m] = bordered.E.toarray() + np.outer(bordered.ell, bordered.ell)
    big[:m, m] = bordered.c
    big[m, :m] = bordered.c
    big[m, m] = bordered.d
    sol = np.linalg.solve(big, np.concatenate([bordered.g, [0.0]]))
    err = np.abs(sol[:m] - x2[~layout.pinned]).max()
    print(f"Sherman-Morrison solve vs dense bordered solve: "
          f"max difference {err:.3e}")


if __name__ == "__main__":
    main()
