"""Analytic test objectives with exact gradients, Hessians, and Lipschitz bounds.

Every objective here is twice continuously differentiable and ships with:

- closed-form ``value``, ``gradient``, and ``hessian``,
- a gradient-Lipschitz bound certified on ``domain_box`` (exact and global
  for the quadratics, a box-restricted supremum bound otherwise),
- its known critical points with their expected second-order class.

The shipped zoo:

``diagonal_quadratic(lambdas)``
    f(x) = 1/2 * sum_i lambda_i x_i^2.  The unique critical point is the
    origin; its class follows the signs of the lambdas.

``strongly_convex_quadratic(lambdas)``
    Same formula with all lambda_i > 0 enforced, used for convergence-rate
    experiments where a positive curvature floor matters.

``nesterov_example``
    f(x, y) = 1/2 x^2 + 1/4 y^4 - 1/2 y^2.  Three critical points: a saddle
    at the origin whose attracting set is exactly the x-axis, and two
    minima at (0, -1) and (0, 1).

``quartic_copositive(Q)``
    f(x) = sum_ij q_ij x_i^2 x_j^2.  The origin is a critical point with an
    identically zero Hessian, the canonical degenerate case.  Deciding
    whether the origin is a local minimum amounts to deciding copositivity
    of Q and is intentionally not implemented; only values and derivatives
    are.

``value`` and ``gradient`` accept a single point of shape ``(d,)`` or a
batch of shape ``(n, d)`` and evaluate row-wise with identical arithmetic,
so batched experiment drivers reproduce single-trajectory results bit for
bit.  ``hessian`` takes a single point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ContractViolationError


class Classification(str, Enum):
    """Second-order taxonomy of a critical point."""

    LOCAL_MIN = "LocalMin"
    LOCAL_MAX = "LocalMax"
    STRICT_SADDLE = "StrictSaddle"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class KnownCriticalPoint:
    """A critical point known in closed form, with its expected class."""

    location: np.ndarray
    expected_class: Classification


def _as_box(box, dimension) -> np.ndarray:
    box = np.asarray(box, dtype=float)
    if box.shape != (dimension, 2):
        raise ContractViolationError(
            f"domain_box must have shape ({dimension}, 2), got {box.shape}"
        )
    if not np.all(np.isfinite(box)) or not np.all(box[:, 0] < box[:, 1]):
        raise ContractViolationError("domain_box intervals must be finite with lo < hi")
    return box


def _check_point(x, dimension) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (dimension,):
        raise ContractViolationError(
            f"point has trailing dimension {x.shape}, expected (..., {dimension})"
        )
    return x


class Objective:
    """Base class: an evaluatable C^2 function on a certified box.

    Subclasses set ``name``, ``dimension``, ``domain_box`` and ``params``
    and implement the three evaluation methods plus ``lipschitz_bound`` and
    ``known_critical_points``.  ``lipschitz_global`` is True when the
    reported bound holds on all of R^d (quadratics), in which case the
    descent engine does not treat leaving the box as a certificate loss.

    Objectives are immutable after construction and safe to share across
    threads; all methods are pure.
    """

    name: str
    dimension: int
    domain_box: np.ndarray
    lipschitz_global: bool = False

    def value(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def hessian(self, x):
        raise NotImplementedError

    def lipschitz_bound(self) -> float:
        raise NotImplementedError

    def known_critical_points(self) -> list[KnownCriticalPoint]:
        raise NotImplementedError

    @property
    def params(self):
        return []

    def contains(self, x) -> np.ndarray:
        """True where x (point or batch) lies inside the closed domain_box."""
        x = _check_point(x, self.dimension)
        lo, hi = self.domain_box[:, 0], self.domain_box[:, 1]
        return np.logical_and(x >= lo, x <= hi).all(axis=-1)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "domain_box": self.domain_box.tolist(),
        }

    def __repr__(self):
        return f"{type(self).__name__}(name={self.name!r}, dimension={self.dimension})"


class DiagonalQuadratic(Objective):
    """f(x) = 1/2 sum_i lambda_i x_i^2 with H = diag(lambda)."""

    name = "diagonal_quadratic"
    lipschitz_global = True

    def __init__(self, lambdas, domain_box=None):
        lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
        if lambdas.ndim != 1 or lambdas.size == 0 or not np.all(np.isfinite(lambdas)):
            raise ContractViolationError("lambdas must be a non-empty finite 1-D sequence")
        self.lambdas = lambdas
        self.dimension = lambdas.size
        if domain_box is None:
            domain_box = np.tile([-2.0, 2.0], (self.dimension, 1))
        self.domain_box = _as_box(domain_box, self.dimension)

    @property
    def params(self):
        return self.lambdas.tolist()

    def value(self, x):
        x = _check_point(x, self.dimension)
        return 0.5 * np.sum(self.lambdas * x * x, axis=-1)

    def gradient(self, x):
        x = _check_point(x, self.dimension)
        return self.lambdas * x

    def hessian(self, x):
        _check_point(np.asarray(x, dtype=float), self.dimension)
        return np.diag(self.lambdas)

    def lipschitz_bound(self) -> float:
        # exact: L = max |lambda_i|, valid on all of R^d
        return float(np.max(np.abs(self.lambdas)))

    def known_critical_points(self) -> list[KnownCriticalPoint]:
        origin = np.zeros(self.dimension)
        if np.all(self.lambdas > 0):
            cls = Classification.LOCAL_MIN
        elif np.all(self.lambdas < 0):
            cls = Classification.LOCAL_MAX
        elif np.any(self.lambdas < 0):
            cls = Classification.STRICT_SADDLE
        else:
            cls = Classification.DEGENERATE
        return [KnownCriticalPoint(origin, cls)]


class StronglyConvexQuadratic(DiagonalQuadratic):
    """Diagonal quadratic with all lambda_i > 0 (strong convexity modulus min lambda)."""

    name = "strongly_convex_quadratic"

    def __init__(self, lambdas, domain_box=None):
        super().__init__(lambdas, domain_box=domain_box)
        if not np.all(self.lambdas > 0):
            raise ContractViolationError("strongly_convex_quadratic requires all lambdas > 0")

    @property
    def strong_convexity_modulus(self) -> float:
        return float(np.min(self.lambdas))


class NesterovExample(Objective):
    """f(x, y) = 1/2 x^2 + 1/4 y^4 - 1/2 y^2.

    gradient  (x, y^3 - y)
    hessian   [[1, 0], [0, 3 y^2 - 1]]

    The gradient is not globally Lipschitz (the quartic term), so the bound
    is the supremum of the Hessian spectral norm over domain_box only.
    """

    name = "nesterov_example"
    dimension = 2
    lipschitz_global = False

    def __init__(self, domain_box=None):
        if domain_box is None:
            domain_box = [[-2.0, 2.0], [-2.0, 2.0]]
        self.domain_box = _as_box(domain_box, 2)

    def value(self, x):
        x = _check_point(x, 2)
        u, v = x[..., 0], x[..., 1]
        v2 = v * v
        return 0.5 * u * u + 0.25 * v2 * v2 - 0.5 * v2

    def gradient(self, x):
        x = _check_point(x, 2)
        u, v = x[..., 0], x[..., 1]
        return np.stack([u, v * v * v - v], axis=-1)

    def hessian(self, x):
        x = _check_point(np.asarray(x, dtype=float), 2)
        v = x[1]
        return np.array([[1.0, 0.0], [0.0, 3.0 * v * v - 1.0]])

    def lipschitz_bound(self) -> float:
        lo, hi = self.domain_box[1]
        y2_max = max(lo * lo, hi * hi)
        y2_min = 0.0 if lo <= 0.0 <= hi else min(lo * lo, hi * hi)
        return max(1.0, abs(3.0 * y2_max - 1.0), abs(3.0 * y2_min - 1.0))

    def known_critical_points(self) -> list[KnownCriticalPoint]:
        return [
            KnownCriticalPoint(np.array([0.0, 0.0]), Classification.STRICT_SADDLE),
            KnownCriticalPoint(np.array([0.0, -1.0]), Classification.LOCAL_MIN),
            KnownCriticalPoint(np.array([0.0, 1.0]), Classification.LOCAL_MIN),
        ]


class QuarticCopositive(Objective):
    """f(x) = sum_ij q_ij x_i^2 x_j^2, zero Hessian at the origin.

    With u = x^2 elementwise and M = Q + Q^T:

        f(x)      = u^T Q u
        grad f(x) = 2 x * (M u)
        hess f(x) = 2 diag(M u) + 4 (x x^T) * M   (elementwise product)
    """

    name = "quartic_copositive"
    lipschitz_global = False

    def __init__(self, q, domain_box=None):
        q = np.atleast_2d(np.asarray(q, dtype=float))
        if q.ndim != 2 or q.shape[0] != q.shape[1] or not np.all(np.isfinite(q)):
            raise ContractViolationError("Q must be a finite square matrix")
        self.q = q
        self._m = q + q.T
        self.dimension = q.shape[0]
        if domain_box is None:
            domain_box = np.tile([-1.0, 1.0], (self.dimension, 1))
        self.domain_box = _as_box(domain_box, self.dimension)

    @property
    def params(self):
        return self.q.tolist()

    def value(self, x):
        x = _check_point(x, self.dimension)
        u = x * x
        qu = np.sum(self.q * u[..., None, :], axis=-1)
        return np.sum(u * qu, axis=-1)

    def gradient(self, x):
        x = _check_point(x, self.dimension)
        u = x * x
        mu = np.sum(self._m * u[..., None, :], axis=-1)
        return 2.0 * x * mu

    def hessian(self, x):
        x = _check_point(np.asarray(x, dtype=float), self.dimension)
        u = x * x
        mu = self._m @ u
        return 2.0 * np.diag(mu) + 4.0 * np.outer(x, x) * self._m

    def lipschitz_bound(self) -> float:
        # entrywise bound on |hess f| over the box, then the row-sum norm,
        # which dominates the spectral norm for symmetric matrices
        b = np.max(np.abs(self.domain_box), axis=1)
        m_abs = np.abs(self._m)
        diag_bound = 2.0 * m_abs @ (b * b)
        entry_bound = 4.0 * np.outer(b, b) * m_abs
        entry_bound[np.diag_indices(self.dimension)] += diag_bound
        return float(np.max(np.sum(entry_bound, axis=1)))

    def known_critical_points(self) -> list[KnownCriticalPoint]:
        return [KnownCriticalPoint(np.zeros(self.dimension), Classification.DEGENERATE)]


_CONSTRUCTORS = {
    "diagonal_quadratic": DiagonalQuadratic,
    "strongly_convex_quadratic": StronglyConvexQuadratic,
    "nesterov_example": lambda params=None, domain_box=None: NesterovExample(domain_box),
    "quartic_copositive": QuarticCopositive,
}

_ALIASES = {"nesterov": "nesterov_example", "quartic": "quartic_copositive"}


def make_objective(name: str, params=None, domain_box=None) -> Objective:
    """Build a zoo objective from its registry name and parameter list."""
    key = _ALIASES.get(name, name)
    if key not in _CONSTRUCTORS:
        known = sorted(set(_CONSTRUCTORS) | set(_ALIASES))
        raise ContractViolationError(f"unknown objective {name!r}; known: {known}")
    if key == "nesterov_example":
        if params not in (None, []):
            raise ContractViolationError("nesterov_example takes no parameters")
        return NesterovExample(domain_box)
    if params is None:
        raise ContractViolationError(f"objective {name!r} requires a parameter list")
    return _CONSTRUCTORS[key](params, domain_box=domain_box)


def objective_from_dict(d: dict) -> Objective:
    return make_objective(d["name"], d.get("params"), d.get("domain_box"))


def parse_objective(spec: str) -> Objective:
    """Parse a CLI-style objective spec, e.g. ``diagonal_quadratic:[1,-1]``.

    The part after the first colon is JSON: a list of eigenvalues for the
    quadratics, a matrix (list of rows) for the quartic.  Plain ``nesterov``
    needs no parameters.
    """
    name, sep, rest = spec.partition(":")
    params = None
    if sep:
        try:
            params = json.loads(rest)
        except json.JSONDecodeError as exc:
            raise ContractViolationError(f"bad objective parameters {rest!r}: {exc}") from exc
    return make_objective(name.strip(), params)
