"""Local objective oracles and the federated minimax problems built from them.

Three problem families are provided:

* ``ScalarTwoAgent`` -- a hard-coded two-agent scalar saddle problem whose
  minimax point is x* = y* = 3.3; handy because every fixed point of interest
  has a closed form.
* ``UncoupledQuadratic`` -- per-agent f_i(x, y) = 1/2 x'Q_i x - 1/2 y'Q_i y
  + c_i'(2x - y) with Q_i symmetric PSD.
* ``RobustLinearRegression`` -- per-agent least squares under an adversarial
  input shift y constrained to a Euclidean ball.

Oracles are immutable after construction; evaluation is reentrant and
thread-safe.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Sequence

import numpy as np

from .core import (
    DimensionMismatchError,
    FeasibleSet,
    Iterate,
    ProductSet,
    Vector,
    as_vector,
    average_vectors,
    norm,
)


class UnsupportedProblemError(ValueError):
    """The requested operation has no implementation for this problem kind."""


class SingularProblemError(ValueError):
    """A linear system that the operation relies on is numerically singular."""


class LocalObjective(ABC):
    """One agent's differentiable objective f_i(x, y).

    Implementations expose the value and both partial gradients; ``p`` and
    ``q`` are the decision dimensions of the min and max player.
    """

    p: int
    q: int

    @abstractmethod
    def value(self, x: Vector, y: Vector) -> float: ...

    @abstractmethod
    def grad_x(self, x: Vector, y: Vector) -> Vector: ...

    @abstractmethod
    def grad_y(self, x: Vector, y: Vector) -> Vector: ...


def finite_difference_gradients(
    obj: LocalObjective, x, y, step: float = 1e-5
) -> tuple[Vector, Vector]:
    """Central-difference estimate of (grad_x, grad_y) using only ``value``.

    Deliberately independent of the oracle's analytic gradients so it can
    serve as a correctness check for them.
    """
    x = as_vector(x, obj.p, "x")
    y = as_vector(y, obj.q, "y")
    gx = np.zeros(obj.p)
    for k in range(obj.p):
        e = np.zeros(obj.p)
        e[k] = step
        gx[k] = (obj.value(x + e, y) - obj.value(x - e, y)) / (2.0 * step)
    gy = np.zeros(obj.q)
    for k in range(obj.q):
        e = np.zeros(obj.q)
        e[k] = step
        gy[k] = (obj.value(x, y + e) - obj.value(x, y - e)) / (2.0 * step)
    return gx, gy


class QuadraticAgent(LocalObjective):
    """f(x, y) = 1/2 x'Qx - 1/2 y'Qy + c'(2x - y) with symmetric Q."""

    def __init__(self, Q, c):
        Q = np.asarray(Q, dtype=np.float64)
        c = as_vector(c)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError(f"Q must be square, got shape {Q.shape}")
        if Q.shape[0] != c.shape[0]:
            raise DimensionMismatchError(Q.shape[0], c.shape[0], "c")
        if not np.allclose(Q, Q.T, rtol=0, atol=1e-10 * (1 + np.abs(Q).max())):
            raise ValueError("Q must be symmetric")
        self.Q = Q
        self.c = c
        self.p = self.q = c.shape[0]

    # constant x-Hessian; the y-Hessian is its negation
    @property
    def hess_x(self) -> np.ndarray:
        return self.Q

    def value(self, x, y):
        x = as_vector(x, self.p, "x")
        y = as_vector(y, self.q, "y")
        return float(
            0.5 * x @ self.Q @ x - 0.5 * y @ self.Q @ y + self.c @ (2.0 * x - y)
        )

    def grad_x(self, x, y):
        x = as_vector(x, self.p, "x")
        return self.Q @ x + 2.0 * self.c

    def grad_y(self, x, y):
        y = as_vector(y, self.q, "y")
        return -(self.Q @ y) - self.c


class ScalarSaddleAgent(LocalObjective):
    """Scalar f(x, y) = (curv/2) x^2 - (curv/2) y^2 - offset (x - y)."""

    def __init__(self, curv: float, offset: float):
        if not curv > 0:
            raise ValueError("curvature must be positive")
        self.curv = float(curv)
        self.offset = float(offset)
        self.p = self.q = 1

    @property
    def hess_x(self) -> np.ndarray:
        return np.array([[self.curv]])

    def value(self, x, y):
        x = as_vector(x, 1, "x")
        y = as_vector(y, 1, "y")
        return float(
            0.5 * self.curv * x[0] ** 2
            - 0.5 * self.curv * y[0] ** 2
            - self.offset * (x[0] - y[0])
        )

    def grad_x(self, x, y):
        x = as_vector(x, 1, "x")
        return self.curv * x - self.offset

    def grad_y(self, x, y):
        y = as_vector(y, 1, "y")
        return -self.curv * y + self.offset


class RlrAgent(LocalObjective):
    """Mean squared residual under input shift y, plus a ridge term on x.

    f(x, y) = (1/n) sum_j (x'(a_j + y) - b_j)^2 + 1/2 ||x||^2.

    Raw samples are kept because both gradients couple x and y through every
    sample; no joint sufficient statistic exists.
    """

    def __init__(self, features, targets):
        A = np.asarray(features, dtype=np.float64)
        b = as_vector(targets)
        if A.ndim != 2:
            raise ValueError(f"features must be a 2-D array, got shape {A.shape}")
        if A.shape[0] != b.shape[0]:
            raise DimensionMismatchError(A.shape[0], b.shape[0], "targets")
        if A.shape[0] < 1:
            raise ValueError("need at least one sample")
        self.A = A
        self.b = b
        self.n = A.shape[0]
        self.p = self.q = A.shape[1]

    def _residuals(self, x, y):
        return (self.A + y) @ x - self.b

    def value(self, x, y):
        x = as_vector(x, self.p, "x")
        y = as_vector(y, self.q, "y")
        r = self._residuals(x, y)
        return float(np.dot(r, r) / self.n + 0.5 * np.dot(x, x))

    def grad_x(self, x, y):
        x = as_vector(x, self.p, "x")
        y = as_vector(y, self.q, "y")
        r = self._residuals(x, y)
        return (2.0 / self.n) * ((self.A + y).T @ r) + x

    def grad_y(self, x, y):
        x = as_vector(x, self.p, "x")
        y = as_vector(y, self.q, "y")
        r = self._residuals(x, y)
        return (2.0 / self.n) * float(np.sum(r)) * x


class MinimaxProblem:
    """m local objectives plus the feasible product set: the simulated federation.

    The global objective is the plain average f = (1/m) sum_i f_i; all
    agent-indexed reductions run in ascending order.
    """

    def __init__(self, agents: Sequence[LocalObjective], sets: ProductSet | None = None):
        agents = list(agents)
        if len(agents) == 0:
            raise ValueError("a problem needs at least one agent")
        p, q = agents[0].p, agents[0].q
        for i, a in enumerate(agents):
            if (a.p, a.q) != (p, q):
                raise DimensionMismatchError(p, a.p, f"agent {i} dims")
        if sets is None:
            sets = ProductSet.unconstrained(p, q)
        if sets.set_x.dim != p or sets.set_y.dim != q:
            raise DimensionMismatchError(p, sets.set_x.dim, "feasible set dims")
        self.agents = agents
        self.sets = sets
        self.p = p
        self.q = q

    @property
    def m(self) -> int:
        return len(self.agents)

    def _check(self, z: Iterate) -> Iterate:
        if z.p != self.p or z.q != self.q:
            raise DimensionMismatchError(self.p + self.q, z.p + z.q, "iterate")
        return z

    def global_value(self, z: Iterate) -> float:
        self._check(z)
        return float(np.mean([a.value(z.x, z.y) for a in self.agents]))

    def global_grad(self, z: Iterate) -> tuple[Vector, Vector]:
        """Arithmetic mean of local gradients, ascending agent order."""
        self._check(z)
        gx = average_vectors([a.grad_x(z.x, z.y) for a in self.agents])
        gy = average_vectors([a.grad_y(z.x, z.y) for a in self.agents])
        return gx, gy

    def gda_field(self, z: Iterate) -> Vector:
        """The stacked monotone operator F(z) = (grad_x f, -grad_y f)."""
        gx, gy = self.global_grad(z)
        return np.concatenate([gx, -gy])


def global_grad(problem: MinimaxProblem, z: Iterate) -> tuple[Vector, Vector]:
    return problem.global_grad(z)


class ScalarTwoAgent(MinimaxProblem):
    """Two heterogeneous scalar agents with minimax point x* = y* = 3.3.

    f_1(x, y) = x^2 - y^2 - (x - y), f_2(x, y) = 4x^2 - 4y^2 - 32(x - y);
    unconstrained, p = q = 1.
    """

    def __init__(self):
        super().__init__(
            [ScalarSaddleAgent(2.0, 1.0), ScalarSaddleAgent(8.0, 32.0)],
            ProductSet.unconstrained(1, 1),
        )


class UncoupledQuadratic(MinimaxProblem):
    """Quadratic family with x and y uncoupled and agent-specific Q_i, c_i."""

    def __init__(self, Q_list, c_list, sets: ProductSet | None = None):
        if len(Q_list) != len(c_list):
            raise ValueError("need one c per Q")
        agents = [QuadraticAgent(Q, c) for Q, c in zip(Q_list, c_list)]
        super().__init__(agents, sets)
        # positive definiteness of sum(Q_i) guarantees a unique stationary pair
        total = np.zeros((self.p, self.p))
        for a in agents:
            total += a.Q
        try:
            np.linalg.cholesky(total)
        except np.linalg.LinAlgError as exc:
            raise SingularProblemError(
                "sum of per-agent curvature matrices is not positive definite"
            ) from exc

    def curvature_sum(self) -> np.ndarray:
        total = np.zeros((self.p, self.p))
        for a in self.agents:
            total += a.Q
        return total

    def offset_sum(self) -> Vector:
        total = np.zeros(self.p)
        for a in self.agents:
            total += a.c
        return total


class RobustLinearRegression(MinimaxProblem):
    """Federated robust least squares: min over x, max over ||y|| <= radius."""

    def __init__(self, features_per_agent, targets_per_agent, y_radius: float = 1.0):
        if len(features_per_agent) != len(targets_per_agent):
            raise ValueError("need one target vector per feature matrix")
        agents = [
            RlrAgent(A, b) for A, b in zip(features_per_agent, targets_per_agent)
        ]
        d = agents[0].p
        sets = ProductSet(
            FeasibleSet.unconstrained(d), FeasibleSet.ball(np.zeros(d), y_radius)
        )
        super().__init__(agents, sets)


# ---------------------------------------------------------------------------
# ground-truth solvers and constants
# ---------------------------------------------------------------------------

def closed_form_minimax(problem: MinimaxProblem) -> Iterate:
    """The unique interior stationary pair, where the averaged gradient vanishes.

    Supported for ``ScalarTwoAgent`` and ``UncoupledQuadratic``; robust linear
    regression has no closed form.
    """
    if isinstance(problem, ScalarTwoAgent):
        curvs = sum(a.curv for a in problem.agents)
        offsets = sum(a.offset for a in problem.agents)
        star = offsets / curvs
        return Iterate(np.array([star]), np.array([star]))
    if isinstance(problem, UncoupledQuadratic):
        SQ = problem.curvature_sum()
        Sc = problem.offset_sum()
        try:
            s = np.linalg.solve(SQ, Sc)
        except np.linalg.LinAlgError as exc:
            raise SingularProblemError("curvature sum is singular") from exc
        residual = norm(SQ @ s - Sc)
        if residual > 1e-6 * (1.0 + norm(Sc)):
            raise SingularProblemError(
                f"linear solve residual {residual:.3e} too large; system near-singular"
            )
        return Iterate(-2.0 * s, -s)
    raise UnsupportedProblemError(
        f"no closed-form minimax point for {type(problem).__name__}"
    )


def estimate_constants(problem: MinimaxProblem) -> tuple[float, float]:
    """(mu, L): worst strong-convexity and smoothness constants over agents.

    mu is the smallest eigenvalue over all per-agent curvature matrices and L
    the largest, computed by a symmetric eigensolve.
    """
    if not all(hasattr(a, "hess_x") for a in problem.agents):
        raise UnsupportedProblemError(
            f"constants are not estimated for {type(problem).__name__}; "
            "supply stepsizes explicitly"
        )
    mu = np.inf
    L = -np.inf
    for a in problem.agents:
        eigs = np.linalg.eigvalsh(a.hess_x)
        mu = min(mu, float(eigs[0]))
        L = max(L, float(eigs[-1]))
    return mu, L
