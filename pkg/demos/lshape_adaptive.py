"""Adaptive refinement at the reentrant corner of the L-shaped domain.

The exact solution behaves like r^a with a about 0.6 for steel, which
limits uniform h-refinement to the rate N^{-a/2}.  Greedy marking driven
by the built-in error estimate recovers the optimal rate, and hp
refinement (h at the corner, p elsewhere) does better still.
"""
import numpy as np

from dpg_elast import StudyConfig, observed_rate, run_convergence_study
from dpg_elast.exact import lshape_exponent
from dpg_elast.material import make_isotropic

LAM, MU = 123.0, 79.3


def run(mode, steps):
    config = StudyConfig(benchmark="lshape", mode=mode, p=1, steps=steps,
                         lam=LAM, mu=MU)
    rows = run_convergence_study(config)
    print(f"\nmode = {mode}")
    print(f"{'step':>4} {'N':>8} {'p_max':>5} {'sigma error':>13} {'eta':>12}")
    for r in rows:
        print(f"{r.step:>4} {r.n_dofs:>8} {r.p_max:>5} "
              f"{r.e_sigma:>13.4e} {r.eta:>12.4e}")
    slope = observed_rate([r.n_dofs for r in rows],
                          [np.hypot(r.e_sigma, r.e_u) for r in rows])
    print(f"observed slope of L2 error vs N (last 3 points): {slope:.3f}")
    return slope


def main():
    steel = make_isotropic(LAM, MU)
    a = lshape_exponent(steel)
    print(f"singularity exponent for steel: a = {a:.6f}")
    print(f"uniform refinement is limited to N^{{-{a / 2:.3f}}}")

    run("uniform_h", 4)
    run("adaptive_h", 10)
    run("adaptive_hp", 10)


if __name__ == "__main__":
    main()
