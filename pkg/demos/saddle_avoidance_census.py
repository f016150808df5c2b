"""Monte Carlo census of where gradient descent lands.

The two-minima objective has a strict saddle at the origin whose stable
set is exactly the x-axis, a measure-zero line.  Ten thousand random
starts never hit it, while a start placed exactly on the axis converges
to the saddle and a start nudged off by 1e-9 escapes.
"""

import time

import numpy as np

from descentlab import (
    GradientMap,
    NesterovExample,
    assign_basin,
    find_critical_points,
    monte_carlo,
    run,
)


def main():
    obj = NesterovExample()
    alpha = 0.99 / obj.lipschitz_bound()
    records = find_critical_points(obj)

    print("critical points:")
    for i, rec in enumerate(records):
        print(f"  [{i}] {rec.location} {rec.classification.value}, "
              f"eigenvalues {rec.hessian_eigenvalues}")

    t0 = time.monotonic()
    report = monte_carlo(obj, alpha, n_trials=10_000, seed=0, records=records)
    elapsed = time.monotonic() - t0
    print(f"\n10,000 uniform starts on [-2,2]^2, alpha = {alpha:.4f} ({elapsed:.1f} s):")
    for i, count in sorted(report.basin_counts.items()):
        print(f"  basin of {records[i].location}: {count}")
    print(f"  diverged {report.diverged}, unresolved {report.unresolved}")
    print(f"  saddle hits: {report.saddle_hits}")

    print("\nthe stable set is reachable only by construction:")
    gmap = GradientMap(obj, alpha)
    on_axis = run(gmap, np.array([0.5, 0.0]))
    print(f"  x0 = (0.5, 0)     -> {on_axis.final_x} "
          f"(basin {assign_basin(on_axis, records)})")
    off_axis = run(gmap, np.array([0.5, 1e-9]))
    print(f"  x0 = (0.5, 1e-9)  -> {off_axis.final_x} "
          f"(basin {assign_basin(off_axis, records)})")


if __name__ == "__main__":
    main()
