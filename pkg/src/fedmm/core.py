"""Dense vector arithmetic, decision-pair iterates, feasible sets, projections.

All operations are pure value arithmetic on float64 arrays: no shared mutable
state, safe to call from any number of threads. Sums over agents always
accumulate in ascending agent index so that results are reproducible no matter
how agent work is scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

Vector = NDArray[np.float64]

UNCONSTRAINED = "unconstrained"
BALL = "ball"


class DimensionMismatchError(ValueError):
    """An operand's dimension differs from what the set or problem expects."""

    def __init__(self, expected: int, actual: int, what: str = "vector"):
        self.expected = expected
        self.actual = actual
        super().__init__(f"{what}: expected dimension {expected}, got {actual}")


def as_vector(v, dim: int | None = None, what: str = "vector") -> Vector:
    """Coerce ``v`` to a 1-D float64 array, optionally checking its length."""
    arr = np.atleast_1d(np.asarray(v, dtype=np.float64))
    if arr.ndim != 1:
        raise ValueError(f"{what}: expected a 1-D array, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatchError(dim, arr.shape[0], what)
    return arr


def check_finite(arr: Vector, what: str = "vector") -> Vector:
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} contains non-finite entries")
    return arr


# ---------------------------------------------------------------------------
# elementary vector operations (dimension-checked)
# ---------------------------------------------------------------------------

def add(a, b) -> Vector:
    a = as_vector(a)
    b = as_vector(b, dim=a.shape[0], what="second operand")
    return a + b


def sub(a, b) -> Vector:
    a = as_vector(a)
    b = as_vector(b, dim=a.shape[0], what="second operand")
    return a - b


def scale(c: float, v) -> Vector:
    return float(c) * as_vector(v)


def dot(a, b) -> float:
    a = as_vector(a)
    b = as_vector(b, dim=a.shape[0], what="second operand")
    return float(np.dot(a, b))


def norm2(v) -> float:
    """Squared Euclidean norm."""
    v = as_vector(v)
    return float(np.dot(v, v))


def norm(v) -> float:
    return float(np.sqrt(norm2(v)))


def average_vectors(vectors: Sequence[Vector]) -> Vector:
    """Mean of equal-length vectors, accumulated in ascending index order.

    The fixed accumulation order is the determinism contract for every
    server-side aggregation: two runs with identical inputs produce bitwise
    identical results.
    """
    if len(vectors) == 0:
        raise ValueError("cannot average an empty collection of vectors")
    acc = np.array(vectors[0], dtype=np.float64, copy=True)
    for v in vectors[1:]:
        if v.shape != acc.shape:
            raise DimensionMismatchError(acc.shape[0], v.shape[0])
        acc += v
    acc /= len(vectors)
    return acc


# ---------------------------------------------------------------------------
# iterates
# ---------------------------------------------------------------------------

@dataclass
class Iterate:
    """The concatenated decision pair z = (x, y) that the algorithms transform."""

    x: Vector
    y: Vector

    def __post_init__(self):
        self.x = check_finite(as_vector(self.x), "x")
        self.y = check_finite(as_vector(self.y), "y")
        if self.x.shape[0] < 1 or self.y.shape[0] < 1:
            raise ValueError("iterate blocks must have dimension >= 1")

    @property
    def p(self) -> int:
        return self.x.shape[0]

    @property
    def q(self) -> int:
        return self.y.shape[0]

    @property
    def stacked(self) -> Vector:
        return np.concatenate([self.x, self.y])

    def copy(self) -> "Iterate":
        return Iterate(self.x.copy(), self.y.copy())

    @staticmethod
    def zeros(p: int, q: int) -> "Iterate":
        return Iterate(np.zeros(p), np.zeros(q))


def average_iterates(iterates: Sequence[Iterate]) -> Iterate:
    return Iterate(
        average_vectors([it.x for it in iterates]),
        average_vectors([it.y for it in iterates]),
    )


# ---------------------------------------------------------------------------
# feasible sets and projections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeasibleSet:
    """Projection-capable constraint region: all of R^dim or a Euclidean ball.

    These two kinds cover every experiment in scope (unconstrained quadratics
    and a unit-ball-bounded perturbation); the unconstrained case is modeled
    explicitly rather than as a huge ball so its projection is an exact
    identity.
    """

    kind: str
    dim: int
    center: Vector | None = None
    radius: float | None = None

    @staticmethod
    def unconstrained(dim: int) -> "FeasibleSet":
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        return FeasibleSet(UNCONSTRAINED, dim)

    @staticmethod
    def ball(center, radius: float) -> "FeasibleSet":
        center = check_finite(as_vector(center), "ball center")
        if not radius > 0:
            raise ValueError(f"ball radius must be positive, got {radius}")
        return FeasibleSet(BALL, center.shape[0], center, float(radius))

    def project(self, v) -> Vector:
        """Euclidean nearest point of the set; identity when already inside."""
        v = as_vector(v, dim=self.dim, what="point to project")
        if self.kind == UNCONSTRAINED:
            return v.copy()
        delta = v - self.center
        dist = norm(delta)
        if dist <= self.radius:
            return v.copy()
        return self.center + delta * (self.radius / dist)

    def contains(self, v, tol: float = 1e-12) -> bool:
        v = as_vector(v, dim=self.dim, what="point")
        if self.kind == UNCONSTRAINED:
            return True
        return norm(v - self.center) <= self.radius + tol


def project(feasible_set: FeasibleSet, v) -> Vector:
    return feasible_set.project(v)


@dataclass(frozen=True)
class ProductSet:
    """Cartesian product X x Y; projections act independently per block."""

    set_x: FeasibleSet
    set_y: FeasibleSet

    @staticmethod
    def unconstrained(p: int, q: int) -> "ProductSet":
        return ProductSet(FeasibleSet.unconstrained(p), FeasibleSet.unconstrained(q))

    def project(self, z: Iterate) -> Iterate:
        return Iterate(self.set_x.project(z.x), self.set_y.project(z.y))
