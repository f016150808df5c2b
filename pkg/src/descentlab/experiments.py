"""Statistical experiments: saddle avoidance, basin accounting, and rates.

The Monte Carlo driver runs many independently seeded trajectories and
assigns each limit to a critical-point basin.  The rate fitters extract
the contraction factor (linear regime) or decay exponent (power regime)
from a single trajectory, and the gradient-inequality checker certifies
the (a, m) pair those rates are predicted from.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .critical import CriticalPointRecord, find_critical_points
from .engine import (
    BatchResult,
    GradientMap,
    StopPolicy,
    StopReason,
    Trajectory,
    run_many,
)
from .errors import (
    BasinAmbiguityError,
    ContractViolationError,
    InapplicableError,
    InsufficientDataError,
)
from .fileio import atomic_write_csv
from .zoo import Objective

LABEL_DIVERGED = "Diverged"
LABEL_LEFT_BOX = "LeftBox"
LABEL_UNRESOLVED = "Unresolved"

BASIN_TOL = 1e-6
FIT_FLOOR = 100.0 * np.finfo(float).eps


def _basin_label(final_x, final_grad_norm, stop_reason, records, tol):
    """Shared basin logic: an index into records, or a status string."""
    if stop_reason is StopReason.DIVERGED:
        return LABEL_DIVERGED
    if stop_reason is StopReason.LEFT_DOMAIN_BOX:
        return LABEL_LEFT_BOX
    if final_grad_norm > tol:
        return LABEL_UNRESOLVED
    matches = [
        i
        for i, rec in enumerate(records)
        if np.max(np.abs(final_x - rec.location)) <= tol
    ]
    if len(matches) > 1:
        raise BasinAmbiguityError(
            f"final iterate within {tol} of records {matches}; "
            "basin tolerance is wider than the critical-point separation"
        )
    if not matches:
        return LABEL_UNRESOLVED
    return matches[0]


def assign_basin(traj: Trajectory, records, tol: float = BASIN_TOL):
    """Label a finished trajectory with the basin it landed in.

    Returns the index of the matching record, or one of the strings
    ``Diverged``, ``LeftBox``, ``Unresolved``.  Two records within ``tol``
    of the final iterate raise an ambiguity error since that means the
    tolerance no longer separates the critical points.
    """
    return _basin_label(
        traj.final_x, traj.final_grad_norm, traj.stop_reason, records, tol
    )


@dataclass
class MonteCarloReport:
    """Basin counts for a batch of uniformly initialized trajectories.

    ``basin_counts`` maps record index to count; together with the
    diverged, left-box, and unresolved counters it partitions the trials.
    ``saddle_hits`` counts trials that settled at a record whose minimum
    Hessian eigenvalue is negative (saddles and maxima both).  Per-trial
    arrays are kept for the CSV writers and for auditing single runs.
    """

    n_trials: int
    seed: int
    alpha: float
    init_box: np.ndarray
    basin_counts: dict
    diverged: int
    left_box: int
    unresolved: int
    saddle_hits: int
    records: list = field(default_factory=list)
    trial_x0: np.ndarray | None = None
    trial_labels: list = field(default_factory=list)
    trial_iterations: np.ndarray | None = None
    trial_final_grad_norm: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "n_trials": int(self.n_trials),
            "seed": int(self.seed),
            "alpha": float(self.alpha),
            "init_box": [[float(v) for v in row] for row in self.init_box],
            "basin_counts": {str(k): int(v) for k, v in sorted(self.basin_counts.items())},
            "diverged": int(self.diverged),
            "left_box": int(self.left_box),
            "unresolved": int(self.unresolved),
            "saddle_hits": int(self.saddle_hits),
            "critical_points": [
                {
                    "index": i,
                    "location": [float(v) for v in rec.location],
                    "classification": rec.classification.value,
                    "is_strict_saddle": rec.is_strict_saddle,
                }
                for i, rec in enumerate(self.records)
            ],
        }

    def trials_to_csv(self, path) -> None:
        d = self.trial_x0.shape[1]
        header = (
            ["trial"]
            + [f"x0_{i + 1}" for i in range(d)]
            + ["label", "iterations", "final_grad_norm"]
        )
        rows = [
            [t, *self.trial_x0[t], str(self.trial_labels[t]),
             int(self.trial_iterations[t]), self.trial_final_grad_norm[t]]
            for t in range(self.n_trials)
        ]
        atomic_write_csv(path, header, rows)

    def basins_to_csv(self, path) -> None:
        header = ["label", "classification", "count"]
        rows = [
            [str(i), self.records[i].classification.value, int(self.basin_counts[i])]
            for i in sorted(self.basin_counts)
        ]
        rows.append([LABEL_DIVERGED, "", self.diverged])
        rows.append([LABEL_LEFT_BOX, "", self.left_box])
        rows.append([LABEL_UNRESOLVED, "", self.unresolved])
        atomic_write_csv(path, header, rows)


def _trial_starts(seed: int, n_trials: int, lo, hi) -> np.ndarray:
    # One RNG stream per trial, keyed by (seed, trial index): any schedule
    # that runs the trials, in chunks or threads, draws the same points.
    d = lo.shape[0]
    x0s = np.empty((n_trials, d))
    for t in range(n_trials):
        u = np.random.default_rng([seed, t]).random(d)
        x0s[t] = lo + u * (hi - lo)
    return x0s


def monte_carlo(
    objective: Objective,
    alpha: float,
    n_trials: int,
    seed: int,
    init_box=None,
    records=None,
    policy: StopPolicy | None = None,
    basin_tol: float = BASIN_TOL,
    n_jobs: int = 1,
) -> MonteCarloReport:
    """Run n_trials uniform initializations and tally where they end up.

    The initialization box defaults to the objective's domain box and must
    lie inside it.  Critical-point records default to a fresh multistart
    search with its own fixed seed, so basin indices do not depend on the
    Monte Carlo seed.  ``n_jobs`` > 1 splits trials across threads; the
    per-trial RNG streams and elementwise stepping make the report
    identical for any split.
    """
    if n_trials < 1:
        raise ContractViolationError("n_trials must be at least 1")
    gmap = GradientMap(objective, alpha)
    box = objective.domain_box if init_box is None else np.asarray(init_box, dtype=float)
    if box.shape != objective.domain_box.shape:
        raise ContractViolationError(
            f"init_box must have shape {objective.domain_box.shape}"
        )
    if np.any(box[:, 0] < objective.domain_box[:, 0]) or np.any(
        box[:, 1] > objective.domain_box[:, 1]
    ):
        raise ContractViolationError("init_box must lie inside the domain box")
    if records is None:
        records = find_critical_points(objective)
    policy = policy or StopPolicy()

    x0s = _trial_starts(seed, n_trials, box[:, 0], box[:, 1])

    if n_jobs <= 1:
        result = run_many(gmap, x0s, policy)
    else:
        chunks = np.array_split(np.arange(n_trials), n_jobs)
        chunks = [c for c in chunks if c.size]
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(lambda c: run_many(gmap, x0s[c], policy), chunks))
        result = BatchResult(
            final_x=np.concatenate([p.final_x for p in parts]),
            final_f=np.concatenate([p.final_f for p in parts]),
            final_grad_norm=np.concatenate([p.final_grad_norm for p in parts]),
            iterations=np.concatenate([p.iterations for p in parts]),
            stop_reasons=[r for p in parts for r in p.stop_reasons],
        )

    labels = [
        _basin_label(
            result.final_x[t],
            result.final_grad_norm[t],
            result.stop_reasons[t],
            records,
            basin_tol,
        )
        for t in range(n_trials)
    ]
    basin_counts = {i: 0 for i in range(len(records))}
    diverged = left_box = unresolved = saddle_hits = 0
    for label in labels:
        if label == LABEL_DIVERGED:
            diverged += 1
        elif label == LABEL_LEFT_BOX:
            left_box += 1
        elif label == LABEL_UNRESOLVED:
            unresolved += 1
        else:
            basin_counts[label] += 1
            if records[label].is_strict_saddle:
                saddle_hits += 1

    return MonteCarloReport(
        n_trials=n_trials,
        seed=seed,
        alpha=alpha,
        init_box=box,
        basin_counts=basin_counts,
        diverged=diverged,
        left_box=left_box,
        unresolved=unresolved,
        saddle_hits=saddle_hits,
        records=list(records),
        trial_x0=x0s,
        trial_labels=labels,
        trial_iterations=result.iterations,
        trial_final_grad_norm=result.final_grad_norm,
    )


@dataclass(frozen=True)
class RateFit:
    """Least-squares rate estimate over a trajectory tail.

    Linear regime: distances behave like C * b^k and ``fitted_b`` is the
    estimated b.  Power regime: distances behave like C * k^p and
    ``fitted_exponent`` is the estimated p (negative for decay).
    """

    regime: str  # "Linear" or "Power"
    fitted_b: float | None
    fitted_exponent: float | None
    fit_window: tuple
    r_squared: float
    n_points: int

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "fitted_b": None if self.fitted_b is None else float(self.fitted_b),
            "fitted_exponent": (
                None if self.fitted_exponent is None else float(self.fitted_exponent)
            ),
            "fit_window": [int(self.fit_window[0]), int(self.fit_window[1])],
            "r_squared": float(self.r_squared),
            "n_points": int(self.n_points),
        }


def _fit_window(traj: Trajectory, x_star) -> tuple[np.ndarray, np.ndarray]:
    """Iterate indices and distances surviving the window rule.

    Drops the first fifth of the trajectory (transient) and anything
    within 100 machine epsilons of the limit (roundoff floor), both of
    which would bias a log-space fit.
    """
    x_star = np.asarray(x_star, dtype=float)
    diff = traj.iterates - x_star
    distances = np.sqrt(np.sum(diff * diff, axis=-1))
    n = distances.shape[0]
    start = n // 5
    ks = np.arange(n)
    keep = (ks >= start) & (distances > FIT_FLOOR)
    return ks[keep], distances[keep]


def _least_squares_line(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(xs, ys, 1)
    fitted = slope * xs + intercept
    ss_res = float(np.sum((ys - fitted) ** 2))
    ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
    if ss_tot <= 0.0:
        r_squared = 1.0 if ss_res <= 1e-30 else 0.0
    else:
        r_squared = 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r_squared


def _require_converged(traj: Trajectory, x_star) -> None:
    x_star = np.asarray(x_star, dtype=float)
    if np.max(np.abs(traj.final_x - x_star)) > BASIN_TOL:
        raise ContractViolationError(
            "trajectory does not end at the given limit point; rate fits "
            "are meaningful only along a convergent tail"
        )


def fit_linear_rate(traj: Trajectory, x_star) -> RateFit:
    """Estimate b from log ||x_k - x*|| = log C + k log b.

    Requires at least 10 usable iterates after the window rule; raises an
    insufficient-data error otherwise (a trajectory started at the limit
    has no usable iterates at all).
    """
    _require_converged(traj, x_star)
    ks, distances = _fit_window(traj, x_star)
    if ks.size < 10:
        raise InsufficientDataError(
            f"only {ks.size} usable iterates in the fit window; need 10"
        )
    slope, _, r_squared = _least_squares_line(ks.astype(float), np.log(distances))
    return RateFit(
        regime="Linear",
        fitted_b=float(np.exp(slope)),
        fitted_exponent=None,
        fit_window=(int(ks[0]), int(ks[-1])),
        r_squared=r_squared,
        n_points=int(ks.size),
    )


def fit_power_rate(traj: Trajectory, x_star) -> RateFit:
    """Estimate p from log ||x_k - x*|| = log C + p log k over the tail.

    Unlike the linear fit this does not require the trajectory to have
    reached the limit: sublinear decay typically exhausts the iteration
    budget far from it.  It does require the tail to be approaching
    x_star, otherwise the regression is meaningless.
    """
    ks, distances = _fit_window(traj, x_star)
    if distances.size >= 2 and distances[-1] >= distances[0]:
        raise ContractViolationError(
            "trajectory tail is not approaching the given limit point"
        )
    positive = ks >= 1
    ks, distances = ks[positive], distances[positive]
    if ks.size < 10:
        raise InsufficientDataError(
            f"only {ks.size} usable iterates in the fit window; need 10"
        )
    slope, _, r_squared = _least_squares_line(np.log(ks.astype(float)), np.log(distances))
    return RateFit(
        regime="Power",
        fitted_b=None,
        fitted_exponent=slope,
        fit_window=(int(ks[0]), int(ks[-1])),
        r_squared=r_squared,
        n_points=int(ks.size),
    )


def best_rate_fit(traj: Trajectory, x_star) -> RateFit:
    """Fit both regimes and keep the one with the better r-squared.

    A regime whose applicability gate rejects the trajectory (the linear
    fit demands an actually reached limit) simply drops out of the
    comparison; if both reject, the first error propagates.
    """
    fits = []
    first_error = None
    for fitter in (fit_linear_rate, fit_power_rate):
        try:
            fits.append(fitter(traj, x_star))
        except ContractViolationError as exc:
            if first_error is None:
                first_error = exc
    if not fits:
        raise first_error
    return max(fits, key=lambda fit: fit.r_squared)


@dataclass(frozen=True)
class LojasiewiczCertificate:
    """Sampled check of the gradient inequality near a critical point.

    States that ||grad f(x)|| >= m |f(x) - f(x*)|^a held (violations = 0)
    for every sampled x in the punctured ball with f above the critical
    value; ``epsilon`` records the largest level-set gap seen, which is
    the width on which the certificate was actually exercised.
    """

    a: float
    m: float
    epsilon: float
    neighborhood_radius: float
    n_samples: int
    n_used: int
    violations: int

    def to_dict(self) -> dict:
        return {
            "a": float(self.a),
            "m": float(self.m),
            "epsilon": float(self.epsilon),
            "neighborhood_radius": float(self.neighborhood_radius),
            "n_samples": int(self.n_samples),
            "n_used": int(self.n_used),
            "violations": int(self.violations),
        }


def check_lojasiewicz(
    objective: Objective,
    x_star,
    a: float,
    m: float,
    radius: float,
    n_samples: int = 1000,
    seed: int = 0,
) -> LojasiewiczCertificate:
    """Sample the ball around x* and count gradient-inequality violations.

    Points with f(x) <= f(x*) are outside the inequality's scope and are
    skipped.  Equality is allowed: a sample counts as a violation only if
    the left side falls below the right by more than one part in 1e10,
    since tight certificates (quadratics along their soft direction) sit
    exactly on the boundary.
    """
    if not 0.0 <= a < 1.0:
        raise ContractViolationError("exponent a must lie in [0, 1)")
    if m < 0.0:
        raise ContractViolationError("m must be nonnegative")
    if radius <= 0.0:
        raise ContractViolationError("radius must be positive")
    x_star = np.asarray(x_star, dtype=float)
    f_star = float(objective.value(x_star))

    rng = np.random.default_rng(seed)
    cube = rng.random((n_samples, x_star.shape[0])) * 2.0 - 1.0
    points = x_star + radius * cube
    dist = np.sqrt(np.sum((points - x_star) ** 2, axis=-1))
    inside = (dist <= radius) & (dist > 0.0)

    values = objective.value(points)
    gaps = values - f_star
    used = inside & (gaps > 0.0)

    grads = objective.gradient(points)
    grad_norms = np.sqrt(np.sum(grads * grads, axis=-1))
    lhs = grad_norms[used]
    rhs = m * gaps[used] ** a
    violations = int(np.count_nonzero(lhs < rhs * (1.0 - 1e-10)))
    epsilon = float(np.max(gaps[used])) if np.any(used) else 0.0
    return LojasiewiczCertificate(
        a=a,
        m=m,
        epsilon=epsilon,
        neighborhood_radius=radius,
        n_samples=n_samples,
        n_used=int(np.count_nonzero(used)),
        violations=violations,
    )


@dataclass(frozen=True)
class PathLengthReport:
    """Empirical tail sums against the gradient-inequality bound."""

    max_ratio: float
    n_checked: int
    window: tuple
    a: float
    m: float
    alpha: float

    @property
    def success(self) -> bool:
        return self.max_ratio <= 1.0 + 1e-6

    def to_dict(self) -> dict:
        return {
            "max_ratio": float(self.max_ratio),
            "n_checked": int(self.n_checked),
            "window": [int(self.window[0]), int(self.window[1])],
            "a": float(self.a),
            "m": float(self.m),
            "alpha": float(self.alpha),
            "success": self.success,
        }


def path_length_check(
    traj: Trajectory,
    a: float,
    m: float,
    alpha: float | None = None,
    f_star: float | None = None,
    x_star=None,
    radius: float | None = None,
) -> PathLengthReport:
    """Check e_k <= 2 f(x_k)^(1-a) / (alpha m (1-a)) along the tail.

    e_k is the remaining path length sum_{j >= k} ||x_{j+1} - x_j|| taken
    from the finite trajectory (an underestimate of the infinite sum, so
    the check errs conservative).  f is shifted by ``f_star``, defaulting
    to the trajectory's final value.  When ``x_star`` and ``radius`` are
    given, iterates in the checked window must stay inside that ball or
    the certificate does not apply and an error is raised.
    """
    if not 0.0 <= a < 1.0:
        raise ContractViolationError("exponent a must lie in [0, 1)")
    if m <= 0.0:
        raise ContractViolationError("m must be positive for a path-length bound")
    alpha = traj.alpha if alpha is None else alpha
    f_star = float(traj.f_values[-1]) if f_star is None else float(f_star)

    steps = traj.iterates[1:] - traj.iterates[:-1]
    step_norms = np.sqrt(np.sum(steps * steps, axis=-1))
    # e[k] = sum of step norms from k onward; reversed cumsum keeps it exact
    tails = np.concatenate([np.cumsum(step_norms[::-1])[::-1], [0.0]])

    gaps = traj.f_values - f_star
    n = gaps.shape[0]
    ks = np.arange(n)
    floor = FIT_FLOOR * max(1.0, abs(f_star))
    usable = (ks >= n // 5) & (gaps > floor)
    if not np.any(usable):
        return PathLengthReport(
            max_ratio=0.0, n_checked=0, window=(0, 0), a=a, m=m, alpha=alpha
        )

    if x_star is not None and radius is not None:
        x_star = np.asarray(x_star, dtype=float)
        diff = traj.iterates[usable] - x_star
        how_far = np.sqrt(np.sum(diff * diff, axis=-1))
        if float(np.max(how_far)) > radius:
            raise InapplicableError(
                "checked window leaves the certified neighborhood; the "
                "path-length bound only holds where the gradient "
                "inequality is certified"
            )

    bounds = 2.0 * gaps[usable] ** (1.0 - a) / (alpha * m * (1.0 - a))
    ratios = tails[usable] / bounds
    window = (int(ks[usable][0]), int(ks[usable][-1]))
    return PathLengthReport(
        max_ratio=float(np.max(ratios)),
        n_checked=int(np.count_nonzero(usable)),
        window=window,
        a=a,
        m=m,
        alpha=alpha,
    )
