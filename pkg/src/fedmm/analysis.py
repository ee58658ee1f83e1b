"""Metrics, closed-form fixed points, robust-loss evaluation, theory checks.

Everything here is a stateless function over immutable problems; results are
deterministic given their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algorithms import (
    DIVERGENCE_LIMIT,
    DivergenceError,
    local_sgda_residual,
    local_sgda_round,
)
from .core import Iterate, Vector, as_vector, norm
from .problems import (
    MinimaxProblem,
    RobustLinearRegression,
    ScalarTwoAgent,
    closed_form_minimax,
)


class UnstableStepsizeError(ValueError):
    """The requested stepsize leaves the scheme's stability region."""


def optimality_gap(z: Iterate, z_star: Iterate) -> float:
    """Squared distance to the reference pair, x block plus y block."""
    if (z.p, z.q) != (z_star.p, z_star.q):
        raise ValueError("iterates have mismatched dimensions")
    dx = z.x - z_star.x
    dy = z.y - z_star.y
    return float(np.dot(dx, dx) + np.dot(dy, dy))


# ---------------------------------------------------------------------------
# fixed points of the uncorrected local scheme on the two-agent scalar problem
# ---------------------------------------------------------------------------

_SCALAR_CURVS = (2.0, 8.0)
_SCALAR_OFFSETS = (1.0, 32.0)


def _scalar_fixed_coordinate(K: int, eta: float) -> float:
    num = 0.0
    den = 0.0
    for curv, offset in zip(_SCALAR_CURVS, _SCALAR_OFFSETS):
        ratio = 1.0 - eta * curv
        if abs(ratio) >= 1.0:
            raise UnstableStepsizeError(
                f"stepsize {eta} is unstable for local curvature {curv}"
            )
        weights = float(np.sum(ratio ** np.arange(K)))
        num += offset * weights
        den += curv * weights
    if den <= 0.0:
        raise UnstableStepsizeError(f"degenerate weight sum for stepsize {eta}")
    return num / den


def local_sgda_fixed_point_closed_form(K: int, eta_x: float, eta_y: float) -> Iterate:
    """Exact fixed point of the uncorrected K-step scheme on the two-agent
    scalar problem, by direct evaluation of the geometric weight sums.

    The K = 1 case collapses to the true minimax point 3.3; for K >= 2 and
    heterogeneous agents the fixed point is biased away from it.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    return Iterate(
        np.array([_scalar_fixed_coordinate(K, eta_x)]),
        np.array([_scalar_fixed_coordinate(K, eta_y)]),
    )


@dataclass
class LimitResult:
    iterate: Iterate
    rounds: int
    converged: bool


def local_sgda_limit(
    problem: MinimaxProblem,
    K: int,
    eta_x: float,
    eta_y: float,
    init: Iterate | None = None,
    *,
    tol: float = 1e-13,
    max_rounds: int = 200_000,
) -> LimitResult:
    """Iterate the uncorrected scheme until the per-round displacement falls
    below ``tol * (1 + |z|)``; an independent oracle for the closed form."""
    z = init if init is not None else Iterate.zeros(problem.p, problem.q)
    x, y = z.x.copy(), z.y.copy()
    for t in range(1, max_rounds + 1):
        x_next, y_next = local_sgda_round(problem, x, y, K, eta_x, eta_y)
        magnitude = max(np.max(np.abs(x_next)), np.max(np.abs(y_next)))
        if not np.isfinite(magnitude) or magnitude > DIVERGENCE_LIMIT:
            raise DivergenceError("LocalSGDA", t, float(magnitude))
        moved = float(np.sqrt(
            np.dot(x_next - x, x_next - x) + np.dot(y_next - y, y_next - y)
        ))
        x, y = x_next, y_next
        if moved <= tol * (1.0 + float(np.sqrt(np.dot(x, x) + np.dot(y, y)))):
            return LimitResult(Iterate(x, y), t, True)
    return LimitResult(Iterate(x, y), max_rounds, False)


@dataclass
class FixedPointReport:
    """Closed-form fixed point versus the true minimax point (and, when
    simulated, versus the long-run limit of the actual iteration)."""

    K: int
    eta_x: float
    eta_y: float
    z_fixed: Iterate
    z_star: Iterate
    gap: float
    residual_norm: float
    z_simulated: Iterate | None = None
    sim_agreement: float | None = None


def fixed_point_report(
    K: int,
    eta_x: float,
    eta_y: float,
    *,
    simulate: bool = True,
    max_rounds: int = 200_000,
) -> FixedPointReport:
    """Build the fixed-point study for the two-agent scalar problem."""
    problem = ScalarTwoAgent()
    z_fixed = local_sgda_fixed_point_closed_form(K, eta_x, eta_y)
    z_star = closed_form_minimax(problem)
    residual = local_sgda_residual(problem, z_fixed, K, eta_x, eta_y)
    report = FixedPointReport(
        K=K,
        eta_x=eta_x,
        eta_y=eta_y,
        z_fixed=z_fixed,
        z_star=z_star,
        gap=optimality_gap(z_fixed, z_star),
        residual_norm=norm(residual),
    )
    if simulate:
        limit = local_sgda_limit(problem, K, eta_x, eta_y, max_rounds=max_rounds)
        report.z_simulated = limit.iterate
        report.sim_agreement = float(
            np.sqrt(optimality_gap(limit.iterate, z_fixed))
        )
    return report


# ---------------------------------------------------------------------------
# robust loss
# ---------------------------------------------------------------------------

@dataclass
class RobustLossResult:
    value: float
    y: Vector
    converged: bool
    iterations: int


def robust_loss(
    problem: RobustLinearRegression,
    x_hat,
    *,
    tol: float = 1e-10,
    max_iters: int = 10_000,
) -> RobustLossResult:
    """Worst-case total loss of the model ``x_hat`` over the feasible shift ball.

    The inner maximization runs projected gradient ascent on y from a zero
    warm start with stepsize 1/L_y, where L_y is a power-iteration estimate of
    the y-curvature at ``x_hat``. Note this is the SUM of per-agent losses,
    not their mean: it exceeds the averaged objective by a factor of m.

    If the ascent has not converged after ``max_iters`` steps the best value
    found is returned with ``converged=False``.
    """
    x = as_vector(x_hat, problem.p, "x_hat")
    ball = problem.sets.set_y

    def total_value(y: Vector) -> float:
        return float(sum(a.value(x, y) for a in problem.agents))

    def total_grad(y: Vector) -> Vector:
        g = np.zeros(problem.q)
        for a in problem.agents:
            g += a.grad_y(x, y)
        return g

    y0 = np.zeros(problem.q)
    if not np.any(x):
        # objective is constant in y when the model is zero
        return RobustLossResult(total_value(y0), y0, True, 0)

    # power iteration on the (exact, since the loss is quadratic in y)
    # Hessian-vector product v -> grad(y0 + v) - grad(y0)
    g_base = total_grad(y0)
    v = x / norm(x)
    curvature = 0.0
    for _ in range(100):
        w = total_grad(y0 + v) - g_base
        lam = norm(w)
        if lam <= 0.0:
            return RobustLossResult(total_value(y0), y0, True, 0)
        v_next = w / lam
        if abs(lam - curvature) <= 1e-12 * max(1.0, lam):
            curvature = lam
            break
        curvature = lam
        v = v_next
    step = 1.0 / curvature

    y = y0
    converged = False
    iterations = 0
    for s in range(1, max_iters + 1):
        y_next = ball.project(y + step * total_grad(y))
        moved = norm(y_next - y)
        y = y_next
        iterations = s
        if moved <= tol:
            converged = True
            break
    return RobustLossResult(total_value(y), y, converged, iterations)


# ---------------------------------------------------------------------------
# theory property checks
# ---------------------------------------------------------------------------

@dataclass
class MonotonicityReport:
    passed: bool
    mu: float
    trials: int
    min_ratio: float
    witness: tuple[Iterate, Iterate] | None = None


def _sample_pair(problem: MinimaxProblem, rng: np.random.Generator, scale: float):
    z = Iterate(rng.normal(0.0, scale, problem.p), rng.normal(0.0, scale, problem.q))
    zp = Iterate(rng.normal(0.0, scale, problem.p), rng.normal(0.0, scale, problem.q))
    return z, zp


def check_strong_monotonicity(
    problem: MinimaxProblem,
    mu: float,
    trials: int,
    *,
    seed: int = 0,
    scale: float = 10.0,
    slack: float = 1e-9,
) -> MonotonicityReport:
    """Sample random pairs and test <F(z)-F(z'), z-z'> >= mu |z-z'|^2 - slack
    for the stacked descent/ascent field F; reports the smallest observed
    curvature ratio and a witness pair on failure."""
    rng = np.random.default_rng(seed)
    min_ratio = np.inf
    witness = None
    passed = True
    for _ in range(trials):
        z, zp = _sample_pair(problem, rng, scale)
        diff = z.stacked - zp.stacked
        dsq = float(np.dot(diff, diff))
        if dsq == 0.0:
            continue
        lhs = float(np.dot(problem.gda_field(z) - problem.gda_field(zp), diff))
        ratio = lhs / dsq
        if ratio < min_ratio:
            min_ratio = ratio
        if lhs < mu * dsq - slack and witness is None:
            passed = False
            witness = (z, zp)
    return MonotonicityReport(passed, mu, trials, float(min_ratio), witness)


@dataclass
class ContractionReport:
    passed: bool
    eta: float
    bound: float
    trials: int
    max_ratio: float
    witness: tuple[Iterate, Iterate] | None = None


def check_contraction(
    problem: MinimaxProblem,
    mu: float,
    L: float,
    eta: float,
    trials: int,
    *,
    seed: int = 0,
    scale: float = 10.0,
) -> ContractionReport:
    """Test that the damped field u -> u - eta F(u) shrinks squared distances
    by at least the factor 1 - eta (2 mu - eta L^2) on random pairs."""
    bound = 1.0 - eta * (2.0 * mu - eta * L**2)
    rng = np.random.default_rng(seed)
    max_ratio = -np.inf
    witness = None
    passed = True
    for _ in range(trials):
        z, zp = _sample_pair(problem, rng, scale)
        diff = z.stacked - zp.stacked
        dsq = float(np.dot(diff, diff))
        if dsq == 0.0:
            continue
        step_diff = diff - eta * (problem.gda_field(z) - problem.gda_field(zp))
        lhs = float(np.dot(step_diff, step_diff))
        ratio = lhs / dsq
        if ratio > max_ratio:
            max_ratio = ratio
        if lhs > bound * dsq * (1.0 + 1e-10) + 1e-12 and witness is None:
            passed = False
            witness = (z, zp)
    return ContractionReport(passed, eta, bound, trials, float(max_ratio), witness)
