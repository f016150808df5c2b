"""Critical-point search, second-order classification, and stable subspaces.

A critical point is a root of the gradient, equivalently a fixed point of
the gradient map.  Classification reads the Hessian spectrum through a
degeneracy tolerance, and the stable subspace collects the Hessian
eigendirections whose gradient-map multiplier 1 - alpha*lambda does not
exceed one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import GradientMap, StopPolicy, StopReason, run_many
from .errors import ContractViolationError
from .fileio import atomic_write_csv
from .jacobi import eigh_jacobi
from .zoo import Classification, Objective

DEGENERACY_TOL = 1e-8
DEDUP_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class CriticalPointRecord:
    """Everything classify() knows about one critical point.

    ``hessian_eigenvalues`` are ascending and ``hessian_eigenvectors[:, i]``
    is the unit eigenvector for the i-th of them.  ``stable_subspace_basis``
    holds, as columns, the eigenvectors with eigenvalue >= -degeneracy_tol;
    these are exactly the directions where the gradient-map Jacobian has
    multiplier <= 1 (up to the same tolerance), for every admissible step
    size.  ``is_strict_saddle`` is the raw min-eigenvalue test and is also
    true for local maxima; ``is_degenerate`` is true when any eigenvalue
    sits inside the tolerance band, even if a negative eigenvalue decided
    the headline classification.
    """

    location: np.ndarray
    grad_norm: float
    hessian_eigenvalues: np.ndarray
    hessian_eigenvectors: np.ndarray
    classification: Classification
    is_strict_saddle: bool
    is_degenerate: bool
    stable_subspace_basis: np.ndarray
    stable_dimension: int
    degeneracy_tol: float = DEGENERACY_TOL

    @property
    def dimension(self) -> int:
        return self.location.shape[0]

    def to_dict(self) -> dict:
        return {
            "location": [float(v) for v in self.location],
            "grad_norm": float(self.grad_norm),
            "hessian_eigenvalues": [float(v) for v in self.hessian_eigenvalues],
            "hessian_eigenvectors": [
                [float(v) for v in row] for row in self.hessian_eigenvectors
            ],
            "classification": self.classification.value,
            "is_strict_saddle": self.is_strict_saddle,
            "is_degenerate": self.is_degenerate,
            "stable_subspace_basis": [
                [float(v) for v in row] for row in self.stable_subspace_basis
            ],
            "stable_dimension": int(self.stable_dimension),
            "degeneracy_tol": float(self.degeneracy_tol),
        }


def _classify_spectrum(eigenvalues: np.ndarray, degeneracy_tol: float) -> Classification:
    # Precedence: a point with both a negative and a near-zero eigenvalue is
    # reported as a saddle (the negative direction dominates the dynamics);
    # the near-zero band is preserved in the is_degenerate flag.
    if eigenvalues[-1] < -degeneracy_tol:
        return Classification.LOCAL_MAX
    if eigenvalues[0] < -degeneracy_tol:
        return Classification.STRICT_SADDLE
    if np.any(np.abs(eigenvalues) <= degeneracy_tol):
        return Classification.DEGENERATE
    return Classification.LOCAL_MIN


def classify(
    objective: Objective,
    x,
    degeneracy_tol: float = DEGENERACY_TOL,
    grad_tol: float = 1e-6,
) -> CriticalPointRecord:
    """Build the full record for a point already known to be critical.

    Raises a contract violation if the gradient norm exceeds ``grad_tol``:
    the spectrum of a non-critical point says nothing about the dynamics.
    """
    x = np.asarray(x, dtype=float)
    grad = objective.gradient(x)
    grad_norm = float(np.sqrt(np.sum(grad * grad)))
    if not np.isfinite(grad_norm) or grad_norm > grad_tol:
        raise ContractViolationError(
            f"point {x.tolist()} is not critical: grad norm {grad_norm:.3e} > {grad_tol:.3e}"
        )
    w, v = eigh_jacobi(objective.hessian(x))
    stable_mask = w >= -degeneracy_tol
    basis = v[:, stable_mask]
    return CriticalPointRecord(
        location=x,
        grad_norm=grad_norm,
        hessian_eigenvalues=w,
        hessian_eigenvectors=v,
        classification=_classify_spectrum(w, degeneracy_tol),
        is_strict_saddle=bool(w[0] < -degeneracy_tol),
        is_degenerate=bool(np.any(np.abs(w) <= degeneracy_tol)),
        stable_subspace_basis=basis,
        stable_dimension=int(np.count_nonzero(stable_mask)),
        degeneracy_tol=degeneracy_tol,
    )


class CriticalPointList(list):
    """Records found by the multistart search, plus search accounting."""

    def __init__(self, records=(), n_seeds: int = 0, n_dropped: int = 0):
        super().__init__(records)
        self.n_seeds = n_seeds
        self.n_dropped = n_dropped


def _newton_root(objective: Objective, x0: np.ndarray, tol: float, max_iters: int = 120):
    """Newton iteration on grad f = 0 with a squared-gradient-norm merit guard.

    Returns the refined root or None.  The gradient tolerance alone is a
    weak certificate at degenerate roots (Newton contracts only linearly
    there), so after hitting it the loop keeps polishing until the step
    stalls below 1e-12; that pins locations to machine scale and lets
    deduplication merge what would otherwise look like a cloud of roots.
    """
    x = x0.copy()
    grad = objective.gradient(x)
    merit = float(np.sum(grad * grad))
    hit_tol = False
    for _ in range(max_iters):
        grad_norm = np.sqrt(merit)
        if grad_norm <= tol:
            hit_tol = True
        if not np.isfinite(merit):
            return None
        hess = objective.hessian(x)
        try:
            direction = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            # Singular Hessian: fall back to steepest descent on the merit.
            direction = hess @ grad
            if not np.any(direction):
                return x if hit_tol else None
        step = 1.0
        accepted = False
        for _ in range(40):
            x_new = x - step * direction
            grad_new = objective.gradient(x_new)
            merit_new = float(np.sum(grad_new * grad_new))
            if np.isfinite(merit_new) and merit_new < merit:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            return x if hit_tol else None
        moved = float(np.max(np.abs(x_new - x)))
        x, grad, merit = x_new, grad_new, merit_new
        if hit_tol and moved <= 1e-12:
            return x
    return x if hit_tol and np.sqrt(merit) <= tol else None


def find_critical_points(
    objective: Objective,
    n_seeds: int = 100,
    seed: int = 0,
    tol: float = 1e-10,
    degeneracy_tol: float = DEGENERACY_TOL,
    dedup_tol: float = DEDUP_TOL,
) -> CriticalPointList:
    """Multistart Newton search for critical points inside the domain box.

    Seeds are uniform on the domain box.  Converged roots closer than
    ``dedup_tol`` in the infinity norm are merged; starts that fail to
    converge are dropped and counted on the returned list.  Records come
    back sorted by location so the output is reproducible.
    """
    if n_seeds < 1:
        raise ContractViolationError("n_seeds must be at least 1")
    rng = np.random.default_rng(seed)
    lo, hi = objective.domain_box[:, 0], objective.domain_box[:, 1]
    seeds = lo + rng.random((n_seeds, objective.dimension)) * (hi - lo)

    roots: list[np.ndarray] = []
    n_dropped = 0
    for x0 in seeds:
        root = _newton_root(objective, x0, tol)
        if root is None:
            n_dropped += 1
            continue
        if any(np.max(np.abs(root - known)) <= dedup_tol for known in roots):
            continue
        roots.append(root)

    roots.sort(key=lambda r: tuple(np.round(r, 9)))
    records = [
        classify(objective, root, degeneracy_tol=degeneracy_tol, grad_tol=max(tol, 1e-9))
        for root in roots
    ]
    return CriticalPointList(records, n_seeds=n_seeds, n_dropped=n_dropped)


def stable_subspace(gmap: GradientMap, record: CriticalPointRecord) -> np.ndarray:
    """Orthonormal basis (columns) for the gradient-map stable subspace.

    Eigenvectors of Dg(x*) = I - alpha * H(x*) whose eigenvalue is at most
    1 + alpha * degeneracy_tol.  Computed from the Jacobian directly rather
    than copied off the record, so the spectrum-mapping relation between
    the two is something callers can check, not an artifact of sharing.
    """
    mu, v = eigh_jacobi(gmap.jacobian(record.location))
    keep = mu <= 1.0 + gmap.alpha * record.degeneracy_tol
    return v[:, keep]


@dataclass
class StableSetSample:
    """Grid sample of the local stable set around a strict saddle.

    ``points`` is every sampled initial condition (grid order), ``converged``
    marks those whose trajectory settled at the saddle, and
    ``max_subspace_distance`` is the largest Euclidean distance from a
    converged point to the affine space x* + E_s (zero when nothing
    converged).
    """

    center: np.ndarray
    points: np.ndarray
    converged: np.ndarray
    grid_spacing: float
    max_subspace_distance: float

    @property
    def converged_points(self) -> np.ndarray:
        return self.points[self.converged]

    def to_csv(self, path) -> None:
        d = self.points.shape[1]
        header = [f"x_{i + 1}" for i in range(d)] + ["converged_to_saddle"]
        rows = [
            list(point) + [int(flag)]
            for point, flag in zip(self.points, self.converged)
        ]
        atomic_write_csv(path, header, rows)


def sample_local_stable_set(
    gmap: GradientMap,
    record: CriticalPointRecord,
    radius: float,
    grid: int = 41,
    policy: StopPolicy | None = None,
    tol: float = 1e-6,
) -> StableSetSample:
    """Run the engine from a grid around a strict saddle and keep what sticks.

    The grid spans [-radius, radius] per axis, trimmed to the closed ball;
    offsets are built symmetrically so the center row sits exactly on the
    invariant axes.  A point counts as converged when its run stops on the
    gradient certificate within ``tol`` (infinity norm) of the saddle.
    """
    if not record.is_strict_saddle:
        raise ContractViolationError("stable-set sampling expects a strict saddle record")
    if record.dimension != 2:
        raise ContractViolationError("grid sampling is implemented for dimension 2 only")
    if radius < 0:
        raise ContractViolationError("radius must be nonnegative")
    if grid < 1:
        raise ContractViolationError("grid must be at least 1")
    center = record.location
    if radius == 0.0:
        points = center[None, :].copy()
    else:
        spacing = 2.0 * radius / max(grid - 1, 1)
        offsets = spacing * (np.arange(grid) - (grid - 1) / 2.0)
        ox, oy = np.meshgrid(offsets, offsets, indexing="ij")
        candidates = center + np.stack([ox.ravel(), oy.ravel()], axis=1)
        dist = np.sqrt(np.sum((candidates - center) ** 2, axis=1))
        points = candidates[dist <= radius * (1.0 + 1e-12)]

    result = run_many(gmap, points, policy or StopPolicy())
    settled = np.array(
        [reason is StopReason.GRAD_NORM_BELOW_TOL for reason in result.stop_reasons]
    )
    near = np.max(np.abs(result.final_x - center), axis=1) <= tol
    converged = settled & near

    max_distance = 0.0
    if np.any(converged):
        basis = record.stable_subspace_basis
        rel = points[converged] - center
        residual = rel - (rel @ basis) @ basis.T
        max_distance = float(np.max(np.sqrt(np.sum(residual * residual, axis=1))))

    spacing = 0.0 if radius == 0.0 else 2.0 * radius / max(grid - 1, 1)
    return StableSetSample(
        center=center.copy(),
        points=points,
        converged=converged,
        grid_spacing=spacing,
        max_subspace_distance=max_distance,
    )
