"""The three optimization procedures and their fixed-point diagnostics.

* ``gda_step`` / ``run_gda`` -- centralized simultaneous descent/ascent.
* ``local_sgda`` -- uncorrected K-step local updates, then server averaging
  (full gradients, no projection anywhere, matching its pseudocode literally).
* ``fedgda_gt`` -- gradient-tracking corrected local updates; the server
  projects the averaged iterate onto the feasible product set.

Within one communication round the m agent loops share nothing and may run
concurrently; every server aggregation is a deterministic ascending-index
reduction. The centralized step is computed as the average of per-agent
steps (algebraically identical to stepping along the averaged gradient), so
a K=1 local run and a centralized run produce bitwise identical traces.

Per round, FedGDA-GT broadcasts both the iterate and the averaged gradient;
round counts below count server synchronizations, so message volume is twice
the round count.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import Iterate, Vector, average_vectors
from .problems import LocalObjective, MinimaxProblem, estimate_constants

GDA = "GDA"
LOCAL_SGDA = "LocalSGDA"
FEDGDA_GT = "FedGDAGT"
ALGORITHMS = (GDA, LOCAL_SGDA, FEDGDA_GT)

DIVERGENCE_LIMIT = 1e12


class DivergenceError(RuntimeError):
    """The server iterate left the trust region; the stepsize is unstable."""

    def __init__(self, algo: str, round_index: int, magnitude: float):
        self.round_index = round_index
        super().__init__(
            f"{algo} diverged at round {round_index}: "
            f"iterate magnitude {magnitude:.3e} exceeds {DIVERGENCE_LIMIT:.0e}"
        )


@dataclass
class AlgoConfig:
    """Stepsizes, local-update count, round budget and start point of one run."""

    algo: str
    eta_x: float
    eta_y: float
    K: int
    rounds: int
    init: Iterate

    def __post_init__(self):
        if self.algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algo!r}; choose from {ALGORITHMS}")
        if not (self.eta_x > 0 and self.eta_y > 0):
            raise ValueError("stepsizes must be positive")
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.algo == GDA and self.K != 1:
            raise ValueError("GDA performs exactly one update per round; K must be 1")
        if self.algo == FEDGDA_GT and self.eta_x != self.eta_y:
            raise ValueError("FedGDA-GT uses a single stepsize; eta_x must equal eta_y")
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")

    @property
    def eta(self) -> float:
        if self.eta_x != self.eta_y:
            raise ValueError("eta is only defined when eta_x == eta_y")
        return self.eta_x


@dataclass
class RoundRecord:
    round: int
    iterate: Iterate
    grad_norm: float
    gap_sq: float | None = None
    robust_loss: float | None = None
    elapsed_ns: int = 0


@dataclass
class RunTrace:
    """One record per communication round, including round 0 at the start point."""

    config: AlgoConfig
    records: list[RoundRecord] = field(default_factory=list)

    @property
    def final(self) -> Iterate:
        return self.records[-1].iterate


# ---------------------------------------------------------------------------
# local update operators
# ---------------------------------------------------------------------------

def _local_path(
    agent: LocalObjective, k: int, eta_x: float, eta_y: float, x: Vector, y: Vector
) -> tuple[Vector, Vector]:
    """k simultaneous uncorrected descent/ascent steps under one agent."""
    for _ in range(k):
        gx = agent.grad_x(x, y)
        gy = agent.grad_y(x, y)
        x = x - eta_x * gx
        y = y + eta_y * gy
    return x, y


def operator_compose(
    agent: LocalObjective, k: int, eta_x: float, eta_y: float, z: Iterate
) -> Iterate:
    """k joint local descent/ascent steps under ``agent``; k = 0 is the identity."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return z.copy()
    x, y = _local_path(agent, k, eta_x, eta_y, z.x, z.y)
    return Iterate(x, y)


def gda_step(
    problem: MinimaxProblem, z: Iterate, eta_x: float, eta_y: float
) -> Iterate:
    """One centralized step: descend x, ascend y along the averaged gradient,
    then project onto the feasible product set.

    Computed as the ascending-index average of per-agent single steps, which
    shares the federated reduction arithmetic.
    """
    problem._check(z)
    xs, ys = [], []
    for agent in problem.agents:
        x, y = _local_path(agent, 1, eta_x, eta_y, z.x, z.y)
        xs.append(x)
        ys.append(y)
    return problem.sets.project(Iterate(average_vectors(xs), average_vectors(ys)))


def local_sgda_round(
    problem: MinimaxProblem, x: Vector, y: Vector, K: int, eta_x: float, eta_y: float
) -> tuple[Vector, Vector]:
    """One communication round of uncorrected local updates: every agent starts
    from the server iterate, walks K steps under its own objective, and the
    server averages the endpoints. No projection is applied."""
    xs, ys = [], []
    for agent in problem.agents:
        xi, yi = _local_path(agent, K, eta_x, eta_y, x, y)
        xs.append(xi)
        ys.append(yi)
    return average_vectors(xs), average_vectors(ys)


def fedgda_round(
    problem: MinimaxProblem, x: Vector, y: Vector, K: int, eta: float
) -> tuple[Vector, Vector]:
    """One gradient-tracking round.

    The per-agent correction (averaged gradient minus local gradient, both at
    the synchronized iterate) is computed once and added to every local
    gradient, so it vanishes identically in the homogeneous case. The averaged
    endpoint is projected onto X and Y.
    """
    gx_list = [agent.grad_x(x, y) for agent in problem.agents]
    gy_list = [agent.grad_y(x, y) for agent in problem.agents]
    gbar_x = average_vectors(gx_list)
    gbar_y = average_vectors(gy_list)
    xs, ys = [], []
    for i, agent in enumerate(problem.agents):
        corr_x = gbar_x - gx_list[i]
        corr_y = gbar_y - gy_list[i]
        xi, yi = x, y
        for _ in range(K):
            gx = agent.grad_x(xi, yi)
            gy = agent.grad_y(xi, yi)
            xi = xi - eta * (gx + corr_x)
            yi = yi + eta * (gy + corr_y)
        xs.append(xi)
        ys.append(yi)
    x_next = problem.sets.set_x.project(average_vectors(xs))
    y_next = problem.sets.set_y.project(average_vectors(ys))
    return x_next, y_next


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def _magnitude(x: Vector, y: Vector) -> float:
    mx = float(np.max(np.abs(x), initial=0.0))
    my = float(np.max(np.abs(y), initial=0.0))
    return max(mx, my)


def _run(
    problem: MinimaxProblem,
    config: AlgoConfig,
    round_fn: Callable[[Vector, Vector], tuple[Vector, Vector]],
    z_star: Iterate | None,
    robust_loss_fn: Callable[[Iterate], float] | None,
) -> RunTrace:
    problem._check(config.init)
    start = time.perf_counter_ns()
    trace = RunTrace(config)
    x, y = config.init.x.copy(), config.init.y.copy()

    def record(t: int):
        z = Iterate(x.copy(), y.copy())
        gx, gy = problem.global_grad(z)
        gap = None
        if z_star is not None:
            gap = float(np.dot(z.x - z_star.x, z.x - z_star.x)
                        + np.dot(z.y - z_star.y, z.y - z_star.y))
        loss = robust_loss_fn(z) if robust_loss_fn is not None else None
        trace.records.append(RoundRecord(
            round=t,
            iterate=z,
            grad_norm=float(np.sqrt(np.dot(gx, gx) + np.dot(gy, gy))),
            gap_sq=gap,
            robust_loss=loss,
            elapsed_ns=time.perf_counter_ns() - start,
        ))

    record(0)
    for t in range(1, config.rounds + 1):
        x, y = round_fn(x, y)
        magnitude = _magnitude(x, y)
        if not np.isfinite(magnitude) or magnitude > DIVERGENCE_LIMIT:
            raise DivergenceError(config.algo, t, magnitude)
        record(t)
    return trace


def local_sgda(
    problem: MinimaxProblem,
    config: AlgoConfig,
    *,
    z_star: Iterate | None = None,
    robust_loss_fn: Callable[[Iterate], float] | None = None,
) -> RunTrace:
    """Run the uncorrected multi-local-update scheme for ``config.rounds`` rounds.

    With K = 1 this is exactly the centralized method: the trace coincides
    bitwise with iterating ``gda_step`` on unconstrained problems.
    """
    return _run(
        problem, config,
        lambda x, y: local_sgda_round(problem, x, y, config.K, config.eta_x, config.eta_y),
        z_star, robust_loss_fn,
    )


def fedgda_gt(
    problem: MinimaxProblem,
    config: AlgoConfig,
    *,
    z_star: Iterate | None = None,
    robust_loss_fn: Callable[[Iterate], float] | None = None,
) -> RunTrace:
    """Run the gradient-tracking corrected scheme for ``config.rounds`` rounds."""
    eta = config.eta
    return _run(
        problem, config,
        lambda x, y: fedgda_round(problem, x, y, config.K, eta),
        z_star, robust_loss_fn,
    )


def run_gda(
    problem: MinimaxProblem,
    config: AlgoConfig,
    *,
    z_star: Iterate | None = None,
    robust_loss_fn: Callable[[Iterate], float] | None = None,
) -> RunTrace:
    """Run the centralized method: one projected global step per round."""

    def one_round(x: Vector, y: Vector):
        z = gda_step(problem, Iterate(x, y), config.eta_x, config.eta_y)
        return z.x, z.y

    return _run(problem, config, one_round, z_star, robust_loss_fn)


_RUNNERS = {GDA: run_gda, LOCAL_SGDA: local_sgda, FEDGDA_GT: fedgda_gt}


def run_algorithm(problem: MinimaxProblem, config: AlgoConfig, **kwargs) -> RunTrace:
    return _RUNNERS[config.algo](problem, config, **kwargs)


# ---------------------------------------------------------------------------
# fixed-point diagnostics
# ---------------------------------------------------------------------------

def local_sgda_residual(
    problem: MinimaxProblem, z: Iterate, K: int, eta_x: float, eta_y: float
) -> Vector:
    """Averaged sum of local gradients along every agent's K-step path from z.

    A point is a fixed point of the uncorrected scheme exactly when this
    vanishes; with K = 1 it reduces to the averaged gradient, so it measures
    how far the scheme's limits drift from true stationarity.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    problem._check(z)
    sums_x, sums_y = [], []
    for agent in problem.agents:
        x, y = z.x, z.y
        acc_x = np.zeros(problem.p)
        acc_y = np.zeros(problem.q)
        for _ in range(K):
            gx = agent.grad_x(x, y)
            gy = agent.grad_y(x, y)
            acc_x += gx
            acc_y += gy
            x = x - eta_x * gx
            y = y + eta_y * gy
        sums_x.append(acc_x)
        sums_y.append(acc_y)
    return np.concatenate([average_vectors(sums_x), average_vectors(sums_y)])


# ---------------------------------------------------------------------------
# stepsize selection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EtaSelection:
    """A chosen stepsize plus the operator norm of the induced round map.

    ``round_map_norm`` < 1 certifies geometric decay: every per-round
    squared-distance ratio is bounded by its square.
    """

    eta: float
    round_map_norm: float


def conservative_eta(mu: float, L: float, K: int) -> float:
    """Half the minimum of the two closed-form stability ceilings."""
    return 0.5 * min(2.0 * mu / L**2, 1.0 / (2.0 * mu * K))


def fedgda_round_map(problem: MinimaxProblem, eta: float, K: int) -> np.ndarray:
    """Exact linear round map of the gradient-tracking scheme on quadratic
    families (identical for the x and y blocks).

    With B_i = I - eta Q_i and S_i = sum_{j<K} B_i^j, the averaged endpoint
    depends on the synchronized iterate through
    (1/m) sum_i [B_i^K - eta S_i (Qbar - Q_i)].
    """
    if not all(hasattr(a, "hess_x") for a in problem.agents):
        raise ValueError("round map is only available for quadratic-family problems")
    Qs = [np.atleast_2d(np.asarray(a.hess_x, dtype=np.float64)) for a in problem.agents]
    d = Qs[0].shape[0]
    Qbar = average_vectors([Q.reshape(-1) for Q in Qs]).reshape(d, d)
    M = np.zeros((d, d))
    for Q in Qs:
        w, V = np.linalg.eigh(Q)
        shrink = (1.0 - eta * w) ** K
        # eta * sum_{j<K} (1 - eta w)^j = (1 - (1 - eta w)^K) / w, except the
        # quotient cancels catastrophically as eta*w -> 0; switch to its series
        small = np.abs(eta * w) < 1e-8
        geo = np.where(
            small,
            eta * K * (1.0 - 0.5 * (K - 1) * eta * w),
            (1.0 - shrink) / np.where(small, 1.0, w),
        )
        P = (V * shrink) @ V.T
        T = (V * geo) @ V.T
        M += P - T @ (Qbar - Q)
    return M / len(Qs)


def fedgda_round_map_norm(problem: MinimaxProblem, eta: float, K: int) -> float:
    return float(np.linalg.norm(fedgda_round_map(problem, eta, K), 2))


def auto_eta_fedgda(problem: MinimaxProblem, K: int, *, grid_size: int = 46) -> EtaSelection:
    """Pick a stepsize for the gradient-tracking scheme on quadratic families.

    Scans a geometric grid below the per-step stability ceiling 2/L and keeps
    the stepsize whose exact round map has the smallest operator norm (larger
    stepsize wins ties). The closed-form conservative value is always among
    the candidates, so the selection never does worse than it.
    """
    mu, L = estimate_constants(problem)
    candidates = [2.0 / L * 0.5**j for j in range(1, grid_size + 1)]
    candidates.append(conservative_eta(mu, L, K))
    best: EtaSelection | None = None
    for eta in candidates:
        s = fedgda_round_map_norm(problem, eta, K)
        if best is None or s < best.round_map_norm - 1e-12 or (
            abs(s - best.round_map_norm) <= 1e-12 and eta > best.eta
        ):
            best = EtaSelection(eta, s)
    return best
