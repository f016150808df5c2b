"""Inversion of the gradient map via its proximal-point characterization.

For step sizes with alpha * L < 1 the map g(x) = x - alpha * grad f(x) is a
bijection onto its image, and the preimage of y is the minimizer of the
strongly convex subproblem

    phi(x) = 1/2 ||x - y||^2 - alpha * f(x),

whose gradient is exactly g(x) - y.  The solver below exploits that
identity: driving the subproblem gradient to zero is the same thing as
matching y.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import GradientMap
from .errors import ContractViolationError, NonConvergenceError


@dataclass(frozen=True)
class ProxSolveReport:
    """Outcome of one inversion: the preimage and its certificate."""

    solution: np.ndarray
    residual: float  # ||g(solution) - y||
    inner_iterations: int
    subproblem_modulus: float  # 1 - alpha * L, the strong-convexity floor

    def to_dict(self) -> dict:
        return {
            "solution": [float(v) for v in self.solution],
            "residual": float(self.residual),
            "inner_iterations": int(self.inner_iterations),
            "subproblem_modulus": float(self.subproblem_modulus),
        }


def invert(
    gmap: GradientMap,
    y,
    tol: float = 1e-10,
    max_inner: int = 200,
    x0=None,
) -> ProxSolveReport:
    """Unique preimage of y under the gradient map.

    Damped Newton on the subproblem, started at y (or ``x0`` when given),
    with a plain gradient step of size 1/(1 + alpha*L) whenever the Newton
    direction fails the decrease check.  Stops once the subproblem gradient
    norm falls below tol * (1 - alpha*L), which bounds the distance to the
    true preimage by tol; the reported residual is the final ||g(x) - y||
    itself.  Raises a non-convergence error carrying the best residual if
    the budget runs out, which usually means y lies too far outside the
    image of the certified region.
    """
    obj = gmap.objective
    alpha = gmap.alpha
    y = np.asarray(y, dtype=float)
    if y.shape != (obj.dimension,):
        raise ContractViolationError(f"y must have shape ({obj.dimension},)")
    if not np.all(np.isfinite(y)):
        raise ContractViolationError("y must be finite")

    modulus = 1.0 - alpha * obj.lipschitz_bound()
    stop_at = tol * modulus
    fallback_step = 1.0 / (1.0 + alpha * obj.lipschitz_bound())

    # The decrease check runs on the squared residual, not the subproblem
    # value: near the solution the value's per-step decrease underflows
    # against its O(1) magnitude, while the residual stays resolvable all
    # the way down.  The Newton direction is a descent direction for this
    # merit wherever the solve succeeds (its slope is the squared gradient
    # norm identically), so damping remains meaningful too.
    x = y.copy() if x0 is None else np.asarray(x0, dtype=float).copy()
    grad = gmap.step(x) - y
    merit = float(np.sum(grad * grad))
    best_residual = np.inf
    for iteration in range(max_inner):
        grad_norm = float(np.sqrt(merit))
        best_residual = min(best_residual, grad_norm)
        if grad_norm <= stop_at:
            return ProxSolveReport(
                solution=x,
                residual=grad_norm,
                inner_iterations=iteration,
                subproblem_modulus=modulus,
            )

        hess = np.eye(obj.dimension) - alpha * obj.hessian(x)
        try:
            direction = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            direction = None

        x_new = grad_new = merit_new = None
        if direction is not None:
            step = 1.0
            for _ in range(30):
                trial = x - step * direction
                trial_grad = gmap.step(trial) - y
                trial_merit = float(np.sum(trial_grad * trial_grad))
                if np.isfinite(trial_merit) and trial_merit <= merit * (
                    1.0 - 1e-4 * step
                ):
                    x_new, grad_new, merit_new = trial, trial_grad, trial_merit
                    break
                step *= 0.5
        if x_new is None:
            trial = x - fallback_step * grad
            trial_grad = gmap.step(trial) - y
            trial_merit = float(np.sum(trial_grad * trial_grad))
            if not np.isfinite(trial_merit):
                break
            x_new, grad_new, merit_new = trial, trial_grad, trial_merit
        x, grad, merit = x_new, grad_new, merit_new

    raise NonConvergenceError(
        f"inversion budget of {max_inner} iterations exhausted "
        f"(best residual {best_residual:.3e}, requested {tol:.3e})",
        best_residual,
    )


@dataclass(frozen=True)
class InjectivityReport:
    """Sampled lower bound on the gradient map's expansion ratio."""

    n_pairs: int
    n_used: int
    min_ratio: float
    threshold: float  # 1 - alpha * L minus numerical slack
    violations: int

    def to_dict(self) -> dict:
        return {
            "n_pairs": int(self.n_pairs),
            "n_used": int(self.n_used),
            "min_ratio": float(self.min_ratio),
            "threshold": float(self.threshold),
            "violations": int(self.violations),
        }


def injectivity_margin_check(
    gmap: GradientMap, n_pairs: int, seed: int = 0
) -> InjectivityReport:
    """Check ||g(x) - g(y)|| >= (1 - alpha*L) ||x - y|| on random pairs.

    Pairs are uniform on the domain box; coincident pairs are skipped.
    A pair counts as a violation when its ratio falls below the margin by
    more than 1e-9 of slack.
    """
    if n_pairs < 1:
        raise ContractViolationError("n_pairs must be at least 1")
    obj = gmap.objective
    rng = np.random.default_rng(seed)
    lo, hi = obj.domain_box[:, 0], obj.domain_box[:, 1]
    xs = lo + rng.random((n_pairs, obj.dimension)) * (hi - lo)
    ys = lo + rng.random((n_pairs, obj.dimension)) * (hi - lo)

    sep = np.sqrt(np.sum((xs - ys) ** 2, axis=-1))
    keep = sep > 0.0
    mapped = np.sqrt(np.sum((gmap.step(xs) - gmap.step(ys)) ** 2, axis=-1))
    ratios = mapped[keep] / sep[keep]

    threshold = (1.0 - gmap.alpha * obj.lipschitz_bound()) - 1e-9
    min_ratio = float(np.min(ratios)) if ratios.size else np.inf
    violations = int(np.count_nonzero(ratios < threshold))
    return InjectivityReport(
        n_pairs=n_pairs,
        n_used=int(np.count_nonzero(keep)),
        min_ratio=min_ratio,
        threshold=threshold,
        violations=violations,
    )


@dataclass(frozen=True)
class RoundTripReport:
    """Worst-case residuals of invert-then-step and step-then-invert."""

    n_samples: int
    max_forward_residual: float  # ||g(invert(y)) - y|| over sampled y = g(x)
    max_backward_residual: float  # ||invert(g(x)) - x|| over sampled x
    tol: float

    def to_dict(self) -> dict:
        return {
            "n_samples": int(self.n_samples),
            "max_forward_residual": float(self.max_forward_residual),
            "max_backward_residual": float(self.max_backward_residual),
            "tol": float(self.tol),
        }


def roundtrip_check(
    gmap: GradientMap, n_samples: int, seed: int = 0, tol: float = 1e-10
) -> RoundTripReport:
    """Verify both compositions on points sampled from the domain box.

    Each sample x gives y = g(x) in the image, so invert(y) must recover x
    and re-stepping must recover y.
    """
    if n_samples < 1:
        raise ContractViolationError("n_samples must be at least 1")
    obj = gmap.objective
    rng = np.random.default_rng(seed)
    lo, hi = obj.domain_box[:, 0], obj.domain_box[:, 1]
    xs = lo + rng.random((n_samples, obj.dimension)) * (hi - lo)

    max_forward = 0.0
    max_backward = 0.0
    for x in xs:
        y = gmap.step(x)
        report = invert(gmap, y, tol=tol)
        forward = gmap.step(report.solution) - y
        max_forward = max(max_forward, float(np.sqrt(np.sum(forward * forward))))
        backward = report.solution - x
        max_backward = max(max_backward, float(np.sqrt(np.sum(backward * backward))))
    return RoundTripReport(
        n_samples=n_samples,
        max_forward_residual=max_forward,
        max_backward_residual=max_backward,
        tol=tol,
    )
