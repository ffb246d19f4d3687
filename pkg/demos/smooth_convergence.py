"""Convergence on the smooth manufactured benchmark.

Runs uniform h-refinement for p = 1, 2, 3 and uniform p-enrichment on a
fixed mesh, printing the combined L2 error and the energy-error estimate
at every step.  The h-runs show the optimal O(h^{p+1}) decrease and the
p-run shows exponential decay.
"""
import numpy as np

from dpg_elast import StudyConfig, run_convergence_study


def print_table(title, rows):
    print(f"\n{title}")
    print(f"{'step':>4} {'N':>8} {'h_min':>10} {'p':>3} "
          f"{'L2 error':>12} {'eta':>12} {'rate':>7}")
    prev = None
    for r in rows:
        err = np.hypot(r.e_sigma, r.e_u)
        rate = ""
        if prev is not None:
            rate = f"{np.log(prev[1] / err) / np.log(prev[0] / r.h_min):7.2f}"
        print(f"{r.step:>4} {r.n_dofs:>8} {r.h_min:>10.4f} {r.p_max:>3} "
              f"{err:>12.4e} {r.eta:>12.4e} {rate:>7}")
        prev = (r.h_min, err)


def main():
    for p in (1, 2, 3):
        config = StudyConfig(benchmark="smooth", mode="uniform_h",
                             p=p, steps=4, lam=1.0, mu=0.5)
        rows = run_convergence_study(config)
        print_table(f"uniform h-refinement, p = {p} (expect rate {p + 1})", rows)

    config = StudyConfig(benchmark="smooth", mode="uniform_p",
                         p=1, steps=5, lam=1.0, mu=0.5)
    rows = run_convergence_study(config)
    print("\nuniform p-enrichment on the fixed 4-element mesh")
    print(f"{'p':>3} {'N':>8} {'L2 error':>12} {'factor':>8}")
    prev = None
    for r in rows:
        err = np.hypot(r.e_sigma, r.e_u)
        factor = f"{prev / err:8.1f}" if prev is not None else ""
        print(f"{r.p_max:>3} {r.n_dofs:>8} {err:>12.4e} {factor:>8}")
        prev = err


if __name__ == "__main__":
    main()
