import math

import numpy as np
import pytest

from fedmm.genbounds import (
    BoundInputs,
    FiniteHypothesisSample,
    bound_terms,
    estimate_rademacher,
    massart_bound,
    population_risk_bound,
    vc_rademacher_bound,
    worst_case_risk_bound,
)


def make_inputs(**overrides):
    base = dict(m=3, n=50, M_i=[0.5, 1.5, 2.5], cover_size=7, delta=0.05,
                epsilon=0.01, L_y=2.0, rademacher=0.3)
    base.update(overrides)
    return BoundInputs(**base)


class TestPopulationRiskBound:
    def test_all_slack_terms_vanish(self):
        inputs = make_inputs(M_i=[0.0, 0.0, 0.0], rademacher=0.0, L_y=0.0)
        assert population_risk_bound(inputs, 1.7) == 1.7

    def test_hand_arithmetic_instance(self):
        # m=1, n=100, M=1, |cover|=1, delta=1/e, R=0, L_y=0:
        # slack = sqrt(1/(2*100) * log(e)) = 0.07071067811865475
        inputs = BoundInputs(m=1, n=100, M_i=[1.0], cover_size=1,
                             delta=math.exp(-1), epsilon=1.0, L_y=0.0,
                             rademacher=0.0)
        assert population_risk_bound(inputs, 0.0) == pytest.approx(
            0.07071067811865475, abs=1e-12
        )

    def test_worked_instance(self):
        inputs = make_inputs()
        assert population_risk_bound(inputs, 1.2) == pytest.approx(
            2.059188835882141, abs=1e-12
        )
        terms = bound_terms(inputs)
        assert terms["concentration_term"] == pytest.approx(
            0.21918883588214122, abs=1e-12
        )
        assert terms["rademacher_term"] == 0.6
        assert terms["lipschitz_term"] == 0.04

    def test_doubling_n_scales_concentration_by_inv_sqrt2(self):
        inputs = make_inputs()
        doubled = make_inputs(n=100)
        a = bound_terms(inputs)["concentration_term"]
        b = bound_terms(doubled)["concentration_term"]
        assert b == pytest.approx(a / math.sqrt(2), rel=1e-14)

    def test_agnostic_special_case_substitution(self):
        # per-agent bounds m * y_i * M reduce the concentration term to
        # M * sqrt(sum(y_i^2) / (2n) * log(cover/delta))
        m, n, M = 4, 30, 2.0
        y = np.array([0.1, 0.2, 0.3, 0.4])
        inputs = BoundInputs(m=m, n=n, M_i=m * y * M, cover_size=5, delta=0.1,
                             epsilon=0.5, L_y=0.0, rademacher=0.0)
        expected = M * math.sqrt(float(np.dot(y, y)) / (2 * n) * math.log(5 / 0.1))
        assert bound_terms(inputs)["concentration_term"] == pytest.approx(
            expected, rel=1e-14
        )

    def test_validation_errors(self):
        with pytest.raises(ValueError):
            make_inputs(delta=1.0)
        with pytest.raises(ValueError):
            make_inputs(delta=0.0)
        with pytest.raises(ValueError):
            make_inputs(cover_size=0)
        with pytest.raises(ValueError):
            make_inputs(M_i=[1.0])  # wrong length
        with pytest.raises(ValueError):
            make_inputs(epsilon=0.0)
        with pytest.raises(ValueError):
            make_inputs(rademacher=-0.1)


class TestWorstCaseBound:
    def test_reduces_to_population_bound_for_constant_inputs(self):
        inputs = make_inputs()
        g = 2.4
        assert worst_case_risk_bound(inputs, g) == population_risk_bound(inputs, g)

    def test_dominates_empirical_value(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            inputs = make_inputs(
                M_i=rng.uniform(0.1, 3.0, size=3),
                rademacher=float(rng.uniform(0, 1)),
            )
            g = float(rng.normal())
            assert worst_case_risk_bound(inputs, g) >= g


class TestMonotonicity:
    """Raising any slack input (or shrinking delta / n) never shrinks the bound."""

    def test_randomized_perturbations(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            inputs = make_inputs(
                m=3,
                n=int(rng.integers(10, 200)),
                M_i=rng.uniform(0.0, 3.0, size=3),
                cover_size=int(rng.integers(1, 50)),
                delta=float(rng.uniform(0.01, 0.99)),
                epsilon=float(rng.uniform(0.001, 2.0)),
                L_y=float(rng.uniform(0.0, 5.0)),
                rademacher=float(rng.uniform(0.0, 2.0)),
            )
            base = population_risk_bound(inputs, 0.0)
            idx = int(rng.integers(0, 3))
            bumped_M = inputs.M_i.copy()
            bumped_M[idx] += rng.uniform(0.1, 1.0)
            grown = [
                make_inputs(n=inputs.n, M_i=bumped_M, cover_size=inputs.cover_size,
                            delta=inputs.delta, epsilon=inputs.epsilon,
                            L_y=inputs.L_y, rademacher=inputs.rademacher),
                make_inputs(n=inputs.n, M_i=inputs.M_i,
                            cover_size=inputs.cover_size + 5, delta=inputs.delta,
                            epsilon=inputs.epsilon, L_y=inputs.L_y,
                            rademacher=inputs.rademacher),
                make_inputs(n=inputs.n, M_i=inputs.M_i,
                            cover_size=inputs.cover_size, delta=inputs.delta / 2,
                            epsilon=inputs.epsilon, L_y=inputs.L_y,
                            rademacher=inputs.rademacher),
                make_inputs(n=inputs.n, M_i=inputs.M_i,
                            cover_size=inputs.cover_size, delta=inputs.delta,
                            epsilon=inputs.epsilon * 1.5, L_y=inputs.L_y,
                            rademacher=inputs.rademacher),
                make_inputs(n=inputs.n, M_i=inputs.M_i,
                            cover_size=inputs.cover_size, delta=inputs.delta,
                            epsilon=inputs.epsilon, L_y=inputs.L_y + 0.5,
                            rademacher=inputs.rademacher),
                make_inputs(n=inputs.n, M_i=inputs.M_i,
                            cover_size=inputs.cover_size, delta=inputs.delta,
                            epsilon=inputs.epsilon, L_y=inputs.L_y,
                            rademacher=inputs.rademacher + 0.25),
            ]
            for g in grown:
                assert population_risk_bound(g, 0.0) >= base - 1e-12
            if inputs.n > 10:
                shrunk_n = make_inputs(
                    n=inputs.n - 5, M_i=inputs.M_i, cover_size=inputs.cover_size,
                    delta=inputs.delta, epsilon=inputs.epsilon, L_y=inputs.L_y,
                    rademacher=inputs.rademacher,
                )
                assert population_risk_bound(shrunk_n, 0.0) >= base - 1e-12


class TestVcBound:
    def test_d_equals_mn_drops_log_term(self):
        m, n = 2, 8
        max_sum = 3.0
        expected = math.sqrt(2 * (m * n) * max_sum / (m**2 * n))
        assert vc_rademacher_bound(m, n, m * n, max_sum) == pytest.approx(
            expected, rel=1e-14
        )

    def test_hand_arithmetic_instance(self):
        assert vc_rademacher_bound(10, 100, 5, 10.0) == pytest.approx(
            0.2509644868611501, abs=1e-12
        )

    def test_homogeneous_scaling_in_loss_bounds(self):
        a = vc_rademacher_bound(4, 25, 3, 7.0)
        b = vc_rademacher_bound(4, 25, 3, 7.0 * 9.0)  # scaling M by 3 scales M^2 by 9
        assert b == pytest.approx(3.0 * a, rel=1e-14)

    def test_rejects_sauer_regime_violation(self):
        with pytest.raises(ValueError, match="m\\*n >= d"):
            vc_rademacher_bound(2, 3, 7, 1.0)


class TestRademacherEstimator:
    def test_single_candidate_estimate_is_noise_around_zero(self):
        rng = np.random.default_rng(2)
        table = rng.normal(size=(1, 20))
        sample = FiniteHypothesisSample(table, m=4, n=5)
        est = estimate_rademacher(sample, 10_000, seed=3)
        assert abs(est.value) <= 4 * est.stderr

    def test_sign_flip_pair_with_unit_entries_is_exactly_one(self):
        sample = FiniteHypothesisSample(np.array([[1.0], [-1.0]]), m=1, n=1)
        est = estimate_rademacher(sample, 64, seed=4)
        assert est.value == 1.0

    def test_nonnegative_for_sign_flip_closed_sets(self):
        rng = np.random.default_rng(5)
        rows = rng.normal(size=(6, 12))
        table = np.vstack([rows, -rows])
        sample = FiniteHypothesisSample(table, m=3, n=4)
        est = estimate_rademacher(sample, 2_000, seed=6)
        assert est.value >= 0.0

    def test_massart_cap_holds(self):
        rng = np.random.default_rng(7)
        for seed in range(5):
            table = rng.normal(size=(8, 15))
            sample = FiniteHypothesisSample(table, m=3, n=5)
            est = estimate_rademacher(sample, 10_000, seed=seed)
            assert est.value <= massart_bound(sample) + 4 * est.stderr

    def test_deterministic_given_seed(self):
        table = np.arange(12.0).reshape(3, 4)
        sample = FiniteHypothesisSample(table, m=2, n=2)
        e1 = estimate_rademacher(sample, 500, seed=11)
        e2 = estimate_rademacher(sample, 500, seed=11)
        assert (e1.value, e1.stderr) == (e2.value, e2.stderr)

    def test_rejects_empty_or_misshapen_tables(self):
        with pytest.raises(ValueError):
            FiniteHypothesisSample(np.zeros((0, 4)), m=2, n=2)
        with pytest.raises(ValueError):
            FiniteHypothesisSample(np.zeros((3, 5)), m=2, n=2)
        with pytest.raises(ValueError):
            FiniteHypothesisSample(np.full((2, 4), np.nan), m=2, n=2)
        sample = FiniteHypothesisSample(np.zeros((2, 4)), m=2, n=2)
        with pytest.raises(ValueError):
            estimate_rademacher(sample, 0, seed=0)
