"""Convergence regimes and the gradient inequality that predicts them.

Near a nondegenerate minimum the distance to the limit decays like b^k
(linear regime); at the flat quartic minimum it decays like k^(-1/2)
(power regime).  Both are consequences of the local gradient inequality
||grad f|| >= m |f - f*|^a, checked here by sampling, together with the
path-length bound it implies along trajectories.
"""

import numpy as np

from descentlab import (
    GradientMap,
    QuarticCopositive,
    StopPolicy,
    StronglyConvexQuadratic,
    best_rate_fit,
    check_lojasiewicz,
    path_length_check,
    run,
)


def main():
    quad = StronglyConvexQuadratic([1.0, 3.0])
    traj = run(GradientMap(quad, 0.2), np.array([1.0, 1.0]))
    fit = best_rate_fit(traj, np.array([0.0, 0.0]))
    print(f"{quad.name}{quad.params}, alpha = 0.2:")
    print(f"  regime {fit.regime}, b = {fit.fitted_b:.4f} "
          f"(slow mode |1 - 0.2*1| = 0.8), r^2 = {fit.r_squared:.6f}")

    quartic = QuarticCopositive([[0.25]])
    long = run(
        GradientMap(quartic, 0.1),
        np.array([1.0]),
        StopPolicy(tol=0.0, max_iters=30_000),
    )
    fit = best_rate_fit(long, np.array([0.0]))
    print(f"\nf(y) = y^4/4, alpha = 0.1, {long.n_steps} steps "
          f"(never reaches the gradient tolerance):")
    print(f"  regime {fit.regime}, exponent = {fit.fitted_exponent:.4f} "
          f"(expected -1/2), r^2 = {fit.r_squared:.6f}")

    print("\ngradient inequality ||grad f|| >= m |f - f*|^a near the minimum:")
    m = np.sqrt(2.0 * quad.strong_convexity_modulus)
    cert = check_lojasiewicz(quad, [0.0, 0.0], a=0.5, m=m, radius=0.5)
    print(f"  quadratic, a = 1/2, m = sqrt(2): "
          f"{cert.violations} violations over {cert.n_used} samples")
    cert = check_lojasiewicz(quartic, [0.0], a=0.75, m=4.0**0.75 * 0.99, radius=0.5)
    print(f"  quartic, a = 3/4:  {cert.violations} violations over {cert.n_used} samples")

    print("\npath-length bound e_k <= 2 (f_k - f*)^(1-a) / (alpha m (1-a)):")
    report = path_length_check(traj, a=0.5, m=m, f_star=0.0)
    print(f"  quadratic trajectory: max ratio {report.max_ratio:.4f} "
          f"over {report.n_checked} tail points -> {'holds' if report.success else 'fails'}")
    report = path_length_check(long, a=0.75, m=4.0**0.75 * 0.99, f_star=0.0)
    print(f"  quartic trajectory:   max ratio {report.max_ratio:.4f} "
          f"-> {'holds' if report.success else 'fails'}")


if __name__ == "__main__":
    main()
