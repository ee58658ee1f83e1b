"""Seeded synthetic problem generation, reproducible from a single 64-bit seed.

RNG contract
------------
Draws come from ``numpy.random.Generator`` (PCG64) instances keyed by
``SeedSequence([seed, stream, sub])``:

* stream 0 is reserved for problem-level draws,
* stream i (1-based) holds agent i's data, so changing the agent count never
  changes the data of the agents that remain,
* ``sub`` indexes the tensors of one stream in the documented order below.

Normal variates use the Generator's native ziggurat sampler; determinism is
guaranteed within this implementation, not across libraries.

Quadratic recipe (one problem): alpha ~ N(0, 10^2) from stream 0; per agent i,
sub 0: A_i entries ~ N(0, (2/i)^2); sub 1: mu_i entries ~ N(alpha, 1);
sub 2: theta_i ~ N(mu_i, I); sub 3: eps_i ~ N(0, 0.5^2 I). Then
b_i = A_i theta_i + eps_i, Q_i = A_i'A_i, c_i = A_i'b_i (theta_i is ephemeral).

Robust-regression recipe: per agent i, sub 0: x_i* ~ N(0, I) (documented
choice); sub 1: shift c_i entries ~ N(0, alpha^2); sub 2: mu_i ~ N(c_i, I);
sub 3: a_{i,j} ~ N(mu_i, i^-1.3 I); sub 4: eps ~ N(0, 1). Then
b_{i,j} = x_i*'a_{i,j} + eps_j.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .problems import (
    RobustLinearRegression,
    SingularProblemError,
    UncoupledQuadratic,
)

PROBLEM_STREAM = 0


def substream(seed: int, stream: int, sub: int) -> np.random.Generator:
    """The deterministic generator for one tensor of one stream."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([int(seed), int(stream), int(sub)]))
    )


@dataclass(frozen=True)
class QuadraticGenSpec:
    m: int
    d: int
    n_i: int
    seed: int

    def __post_init__(self):
        if self.m < 1 or self.d < 1:
            raise ValueError("m and d must be >= 1")
        if self.n_i < self.d:
            raise ValueError("n_i must be >= d so A'A is full rank almost surely")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class RlrGenSpec:
    m: int
    d: int
    n_i: int
    alpha: float
    seed: int

    def __post_init__(self):
        if self.m < 1 or self.d < 1 or self.n_i < 1:
            raise ValueError("m, d and n_i must be >= 1")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


def _quadratic_agent_data(seed: int, i: int, d: int, n: int, alpha: float):
    A = substream(seed, i, 0).normal(0.0, 2.0 / i, size=(n, d))
    mu = substream(seed, i, 1).normal(alpha, 1.0, size=d)
    theta = substream(seed, i, 2).normal(mu, 1.0)
    eps = substream(seed, i, 3).normal(0.0, 0.5, size=n)
    b = A @ theta + eps
    return A.T @ A, A.T @ b


def gen_quadratic(spec: QuadraticGenSpec) -> UncoupledQuadratic:
    """Generate the uncoupled quadratic federation for ``spec``.

    If the summed curvature turns out numerically singular (solve residual
    above 1e-6), regeneration is retried with seed+1 up to three times.
    """
    last_error: Exception | None = None
    for attempt in range(4):
        seed = spec.seed + attempt
        alpha = float(substream(seed, PROBLEM_STREAM, 0).normal(0.0, 10.0))
        Qs, cs = [], []
        for i in range(1, spec.m + 1):
            Q, c = _quadratic_agent_data(seed, i, spec.d, spec.n_i, alpha)
            Qs.append(Q)
            cs.append(c)
        try:
            problem = UncoupledQuadratic(Qs, cs)
            SQ = problem.curvature_sum()
            Sc = problem.offset_sum()
            sol = np.linalg.solve(SQ, Sc)
            residual = float(np.linalg.norm(SQ @ sol - Sc))
            if residual > 1e-6 * (1.0 + float(np.linalg.norm(Sc))):
                raise SingularProblemError(
                    f"solve residual {residual:.3e} exceeds 1e-6"
                )
            return problem
        except (SingularProblemError, np.linalg.LinAlgError) as exc:
            last_error = exc
    raise SingularProblemError(
        f"could not generate a well-conditioned problem from seed {spec.seed} "
        f"after 4 attempts: {last_error}"
    )


def gen_rlr(spec: RlrGenSpec) -> RobustLinearRegression:
    """Generate the robust-linear-regression federation for ``spec``."""
    features, targets = [], []
    for i in range(1, spec.m + 1):
        x_star = substream(spec.seed, i, 0).normal(0.0, 1.0, size=spec.d)
        c = substream(spec.seed, i, 1).normal(0.0, spec.alpha, size=spec.d)
        mu = substream(spec.seed, i, 2).normal(c, 1.0)
        A = substream(spec.seed, i, 3).normal(mu, i ** -0.65, size=(spec.n_i, spec.d))
        eps = substream(spec.seed, i, 4).normal(0.0, 1.0, size=spec.n_i)
        features.append(A)
        targets.append(A @ x_star + eps)
    return RobustLinearRegression(features, targets)


# ---------------------------------------------------------------------------
# dataset container
#
# Layout (little-endian): magic "FEDMM1" (6 bytes) | kind u8 (1 = quadratic,
# 2 = rlr) | m u64 | d u64 | n u64 | seed u64 | alpha f64 (0.0 for quadratic).
# Payload, agents in ascending order, float64 row-major:
#   quadratic: Q_i (d*d), c_i (d)
#   rlr:       A_i (n*d), b_i (n)
# ---------------------------------------------------------------------------

MAGIC = b"FEDMM1"
KIND_QUADRATIC = 1
KIND_RLR = 2
_HEADER = struct.Struct("<6sBQQQQd")


def save_dataset(path, problem, spec) -> None:
    """Dump a generated problem so runs can be replayed without regeneration."""
    if isinstance(problem, UncoupledQuadratic):
        kind, alpha = KIND_QUADRATIC, 0.0
        blocks = [(a.Q, a.c) for a in problem.agents]
    elif isinstance(problem, RobustLinearRegression):
        kind, alpha = KIND_RLR, float(spec.alpha)
        blocks = [(a.A, a.b) for a in problem.agents]
    else:
        raise ValueError(f"cannot dump a {type(problem).__name__}")
    header = _HEADER.pack(
        MAGIC, kind, spec.m, spec.d, spec.n_i, spec.seed, alpha
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for mat, vec in blocks:
            fh.write(np.ascontiguousarray(mat, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(vec, dtype="<f8").tobytes())


def load_dataset(path):
    """Read a container back; returns (problem, info dict)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size or raw[:6] != MAGIC:
        raise ValueError(f"{path} is not a FEDMM1 dataset container")
    magic, kind, m, d, n, seed, alpha = _HEADER.unpack_from(raw)
    info = {"kind": kind, "m": m, "d": d, "n": n, "seed": seed, "alpha": alpha}
    offset = _HEADER.size
    if kind == KIND_QUADRATIC:
        mat_shape, vec_len = (d, d), d
    elif kind == KIND_RLR:
        mat_shape, vec_len = (n, d), n
    else:
        raise ValueError(f"unknown dataset kind {kind}")
    mat_bytes = 8 * mat_shape[0] * mat_shape[1]
    vec_bytes = 8 * vec_len
    expected = _HEADER.size + m * (mat_bytes + vec_bytes)
    if len(raw) != expected:
        raise ValueError(
            f"container size mismatch: expected {expected} bytes, got {len(raw)}"
        )
    mats, vecs = [], []
    for _ in range(m):
        mats.append(
            np.frombuffer(raw, dtype="<f8", count=mat_shape[0] * mat_shape[1],
                          offset=offset).reshape(mat_shape).copy()
        )
        offset += mat_bytes
        vecs.append(
            np.frombuffer(raw, dtype="<f8", count=vec_len, offset=offset).copy()
        )
        offset += vec_bytes
    if kind == KIND_QUADRATIC:
        return UncoupledQuadratic(mats, vecs), info
    return RobustLinearRegression(mats, vecs), info
