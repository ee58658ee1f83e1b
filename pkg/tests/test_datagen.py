import numpy as np
import pytest

from fedmm.datagen import (
    KIND_QUADRATIC,
    KIND_RLR,
    QuadraticGenSpec,
    RlrGenSpec,
    gen_quadratic,
    gen_rlr,
    load_dataset,
    save_dataset,
    substream,
)
from fedmm.problems import closed_form_minimax


class TestQuadraticGeneration:
    def test_same_seed_bitwise_identical(self):
        spec = QuadraticGenSpec(m=3, d=4, n_i=10, seed=42)
        p1, p2 = gen_quadratic(spec), gen_quadratic(spec)
        for a1, a2 in zip(p1.agents, p2.agents):
            assert np.array_equal(a1.Q, a2.Q)
            assert np.array_equal(a1.c, a2.c)

    def test_agent_streams_survive_changing_m(self):
        p2 = gen_quadratic(QuadraticGenSpec(m=2, d=4, n_i=10, seed=42))
        p3 = gen_quadratic(QuadraticGenSpec(m=3, d=4, n_i=10, seed=42))
        assert np.array_equal(p2.agents[0].Q, p3.agents[0].Q)
        assert np.array_equal(p2.agents[1].c, p3.agents[1].c)

    def test_scalar_instance_algebra(self):
        # replay the documented substreams to recover a, theta, eps, then
        # check Q = a^2 and c = a (a t + e)
        seed = 5
        spec = QuadraticGenSpec(m=1, d=1, n_i=1, seed=seed)
        prob = gen_quadratic(spec)
        alpha = float(substream(seed, 0, 0).normal(0.0, 10.0))
        a = float(substream(seed, 1, 0).normal(0.0, 2.0))
        mu = float(substream(seed, 1, 1).normal(alpha, 1.0))
        t = float(substream(seed, 1, 2).normal(mu, 1.0))
        e = float(substream(seed, 1, 3).normal(0.0, 0.5))
        assert prob.agents[0].Q[0, 0] == pytest.approx(a * a, rel=1e-15)
        assert prob.agents[0].c[0] == pytest.approx(a * (a * t + e), rel=1e-14)

    def test_benchmark_scale_instance_is_solvable(self):
        prob = gen_quadratic(QuadraticGenSpec(m=20, d=50, n_i=500, seed=7))
        z = closed_form_minimax(prob)
        gx, gy = prob.global_grad(z)
        Sc = prob.offset_sum()
        residual = np.sqrt(np.dot(gx, gx) + np.dot(gy, gy))
        assert residual <= 1e-9 * (1 + np.linalg.norm(Sc))

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            QuadraticGenSpec(m=0, d=2, n_i=4, seed=0)
        with pytest.raises(ValueError):
            QuadraticGenSpec(m=1, d=5, n_i=4, seed=0)  # n_i < d
        with pytest.raises(ValueError):
            QuadraticGenSpec(m=1, d=1, n_i=1, seed=-1)


class TestRlrGeneration:
    def test_same_seed_identical(self):
        spec = RlrGenSpec(m=2, d=3, n_i=4, alpha=5.0, seed=9)
        p1, p2 = gen_rlr(spec), gen_rlr(spec)
        for a1, a2 in zip(p1.agents, p2.agents):
            assert np.array_equal(a1.A, a2.A)
            assert np.array_equal(a1.b, a2.b)

    def test_alpha_zero_means_zero_shift(self):
        # the per-agent prior shift c_i collapses to zero when alpha = 0
        seed = 13
        for i in (1, 2, 3):
            c = substream(seed, i, 1).normal(0.0, 0.0, size=4)
            assert np.array_equal(c, np.zeros(4))
        # and the generated data coincides with data drawn around mu_i ~ N(0, I)
        prob = gen_rlr(RlrGenSpec(m=2, d=4, n_i=5, alpha=0.0, seed=seed))
        for idx, agent in enumerate(prob.agents, start=1):
            mu = substream(seed, idx, 2).normal(np.zeros(4), 1.0)
            A = substream(seed, idx, 3).normal(mu, idx**-0.65, size=(5, 4))
            assert np.array_equal(agent.A, A)

    def test_noise_law_has_unit_variance(self):
        spec = RlrGenSpec(m=1, d=3, n_i=100_000, alpha=2.0, seed=21)
        prob = gen_rlr(spec)
        x_star = substream(21, 1, 0).normal(0.0, 1.0, size=3)
        noise = prob.agents[0].b - prob.agents[0].A @ x_star
        assert np.var(noise) == pytest.approx(1.0, rel=0.05)

    def test_stream_independence_across_m(self):
        p1 = gen_rlr(RlrGenSpec(m=1, d=3, n_i=4, alpha=1.0, seed=3))
        p4 = gen_rlr(RlrGenSpec(m=4, d=3, n_i=4, alpha=1.0, seed=3))
        assert np.array_equal(p1.agents[0].A, p4.agents[0].A)
        assert np.array_equal(p1.agents[0].b, p4.agents[0].b)


class TestRngAdapter:
    def test_moments_within_four_standard_errors(self):
        n = 100_000
        draws = substream(123, 2, 0).normal(1.5, 2.0, size=n)
        se_mean = 2.0 / np.sqrt(n)
        assert abs(draws.mean() - 1.5) <= 4 * se_mean
        # variance of the sample variance of a normal is ~ 2 sigma^4 / n
        se_var = np.sqrt(2.0 / n) * 4.0
        assert abs(draws.var() - 4.0) <= 4 * se_var

    def test_substreams_are_reproducible_and_distinct(self):
        a = substream(7, 1, 0).normal(size=5)
        b = substream(7, 1, 0).normal(size=5)
        c = substream(7, 1, 1).normal(size=5)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestContainer:
    def test_quadratic_round_trip(self, tmp_path):
        spec = QuadraticGenSpec(m=3, d=4, n_i=10, seed=17)
        prob = gen_quadratic(spec)
        path = tmp_path / "quad.fedmm"
        save_dataset(path, prob, spec)
        loaded, info = load_dataset(path)
        assert info == {"kind": KIND_QUADRATIC, "m": 3, "d": 4, "n": 10,
                        "seed": 17, "alpha": 0.0}
        for a, b in zip(prob.agents, loaded.agents):
            assert np.array_equal(a.Q, b.Q)
            assert np.array_equal(a.c, b.c)

    def test_rlr_round_trip(self, tmp_path):
        spec = RlrGenSpec(m=2, d=3, n_i=5, alpha=4.0, seed=19)
        prob = gen_rlr(spec)
        path = tmp_path / "rlr.fedmm"
        save_dataset(path, prob, spec)
        loaded, info = load_dataset(path)
        assert info["kind"] == KIND_RLR
        assert info["alpha"] == 4.0
        for a, b in zip(prob.agents, loaded.agents):
            assert np.array_equal(a.A, b.A)
            assert np.array_equal(a.b, b.b)

    def test_rejects_wrong_magic(self, tmp_path):
        path = tmp_path / "bogus.bin"
        path.write_bytes(b"NOTFMM" + b"\x00" * 64)
        with pytest.raises(ValueError, match="not a FEDMM1"):
            load_dataset(path)

    def test_rejects_truncated_payload(self, tmp_path):
        spec = QuadraticGenSpec(m=2, d=3, n_i=6, seed=23)
        prob = gen_quadratic(spec)
        path = tmp_path / "quad.fedmm"
        save_dataset(path, prob, spec)
        raw = path.read_bytes()
        path.write_bytes(raw[:-8])
        with pytest.raises(ValueError, match="size mismatch"):
            load_dataset(path)
