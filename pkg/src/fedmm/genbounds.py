"""Generalization-bound evaluators and a Monte-Carlo Rademacher estimator.

The bound evaluators are pure formula plumbing: they evaluate their
right-hand sides exactly as written and make no probabilistic claims
themselves. The cover size |Y_eps| is always an input, never computed, since
building minimum covers is out of scope.

The complexity estimator is the *empirical* (conditional on one drawn
dataset) variant: the supremum over models is replaced by an exact maximum
over the rows of a user-supplied loss table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Vector, as_vector


@dataclass(frozen=True)
class BoundInputs:
    """Everything the closed-form bounds need.

    ``M_i`` holds per-agent bounds on |loss| at the y of interest (for the
    worst-case bound, pass the maxima over y). ``rademacher`` is the complexity
    value to plug in, supplied directly or estimated via
    ``estimate_rademacher``.
    """

    m: int
    n: int
    M_i: Vector
    cover_size: int
    delta: float
    epsilon: float
    L_y: float
    rademacher: float
    vc_dim: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "M_i", as_vector(self.M_i))
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be >= 1")
        if self.M_i.shape[0] != self.m:
            raise ValueError(f"expected {self.m} per-agent loss bounds, got {self.M_i.shape[0]}")
        if np.any(self.M_i < 0):
            raise ValueError("per-agent loss bounds must be nonnegative")
        if self.cover_size < 1:
            raise ValueError("cover_size must be >= 1")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.L_y < 0 or self.rademacher < 0:
            raise ValueError("L_y and rademacher must be nonnegative")
        if self.vc_dim is not None and self.vc_dim < 1:
            raise ValueError("vc_dim must be >= 1 when given")


def concentration_term(inputs: BoundInputs) -> float:
    """sqrt( sum_i M_i^2 / (2 m^2 n) * log(|Y_eps| / delta) )."""
    sum_sq = float(np.dot(inputs.M_i, inputs.M_i))
    return math.sqrt(
        sum_sq / (2.0 * inputs.m**2 * inputs.n)
        * math.log(inputs.cover_size / inputs.delta)
    )


def bound_terms(inputs: BoundInputs) -> dict[str, float]:
    """The three slack terms shared by both high-probability bounds."""
    return {
        "rademacher_term": 2.0 * inputs.rademacher,
        "concentration_term": concentration_term(inputs),
        "lipschitz_term": 2.0 * inputs.L_y * inputs.epsilon,
    }


def population_risk_bound(inputs: BoundInputs, empirical_risk: float) -> float:
    """High-probability upper bound on the population risk at a fixed (x, y):
    empirical risk + 2 R(X, y) + concentration term + 2 L_y eps."""
    terms = bound_terms(inputs)
    return float(empirical_risk) + sum(terms.values())


def worst_case_risk_bound(inputs: BoundInputs, worst_case_empirical: float) -> float:
    """Same right-hand side with worst-case-over-y inputs: bounds the
    worst-case population risk by the worst-case empirical risk plus slack.

    ``inputs.M_i`` must hold max-over-y loss bounds and ``inputs.rademacher``
    the max-over-y complexity.
    """
    return population_risk_bound(inputs, worst_case_empirical)


def vc_rademacher_bound(m: int, n: int, d: int, max_sum_Mi2: float) -> float:
    """Complexity cap for finite-valued losses over a class of VC-dimension d:
    sqrt( 2 d * max_y{sum_i M_i^2(y)} / (m^2 n) * (1 + log(m n / d)) )."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    if d < 1:
        raise ValueError("d must be >= 1")
    if m * n < d:
        raise ValueError(f"need m*n >= d, got m*n = {m * n} < d = {d}")
    if max_sum_Mi2 < 0:
        raise ValueError("max_sum_Mi2 must be nonnegative")
    return math.sqrt(
        2.0 * d * max_sum_Mi2 / (m**2 * n) * (1.0 + math.log(m * n / d))
    )


# ---------------------------------------------------------------------------
# Monte-Carlo empirical Rademacher complexity over a finite candidate set
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteHypothesisSample:
    """Loss table of shape (num_candidates, m*n): l(x, y; xi_{i,j}) for each
    candidate model x (row) at a fixed y over one drawn dataset, columns in
    agent-major sample-minor order."""

    loss_table: np.ndarray
    m: int
    n: int

    def __post_init__(self):
        table = np.asarray(self.loss_table, dtype=np.float64)
        object.__setattr__(self, "loss_table", table)
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be >= 1")
        if table.ndim != 2:
            raise ValueError(f"loss table must be 2-D, got shape {table.shape}")
        if table.shape[0] < 1:
            raise ValueError("candidate set must not be empty")
        if table.shape[1] != self.m * self.n:
            raise ValueError(
                f"loss table must have m*n = {self.m * self.n} columns, "
                f"got {table.shape[1]}"
            )
        if not np.all(np.isfinite(table)):
            raise ValueError("loss table contains non-finite entries")


@dataclass(frozen=True)
class RademacherEstimate:
    value: float
    stderr: float
    num_draws: int


def estimate_rademacher(
    sample: FiniteHypothesisSample, num_sigma_draws: int, seed: int
) -> RademacherEstimate:
    """Monte-Carlo average over sign draws of the per-draw maximum correlation
    max_rows (1/mn) sum_j sigma_j * loss_j, plus its standard error."""
    if num_sigma_draws < 1:
        raise ValueError("need at least one sigma draw")
    mn = sample.m * sample.n
    rng = np.random.default_rng(seed)
    sigma = rng.integers(0, 2, size=(num_sigma_draws, mn)) * 2 - 1
    correlations = (sigma.astype(np.float64) @ sample.loss_table.T) / mn
    sups = correlations.max(axis=1)
    value = float(sups.mean())
    stderr = float(sups.std(ddof=1) / math.sqrt(num_sigma_draws)) if num_sigma_draws > 1 else 0.0
    return RademacherEstimate(value, stderr, num_sigma_draws)


def massart_bound(sample: FiniteHypothesisSample) -> float:
    """Finite-class cap r * sqrt(2 log C) / (m n), with r the largest row norm
    and C the number of candidates; the estimator can never exceed it."""
    r = float(np.max(np.linalg.norm(sample.loss_table, axis=1)))
    C = sample.loss_table.shape[0]
    return r * math.sqrt(2.0 * math.log(C)) / (sample.m * sample.n)
