import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp
from scipy.stats import multivariate_normal

from coopsense.calibrate import h0_moments, h1_moments
from coopsense.statistics import (
    MeasurementBatch,
    StatisticKind,
    UnsupportedStatisticError,
    distributed_evaluate,
    gllr_statistic,
    llr_statistic,
    lm_statistic,
    qm_statistic,
    quadratic_form,
)
from tests.conftest import make_model

entries = st.floats(min_value=-30.0, max_value=30.0, allow_nan=False)


def batch_arrays(min_n=1, max_n=4, min_m=1, max_m=4):
    shapes = st.tuples(
        st.integers(min_n, max_n), st.integers(min_m, max_m)
    )
    return shapes.flatmap(lambda s: hnp.arrays(np.float64, s, elements=entries))


class TestBatchContract:
    def test_vectorization_stacks_time_slots(self):
        batch = MeasurementBatch(np.array([[1.0, 2.0], [3.0, 4.0]]))
        # slot 0 = sensors [1, 3], slot 1 = sensors [2, 4]
        assert np.array_equal(batch.vector, [1.0, 3.0, 2.0, 4.0])
        assert batch.n == 2 and batch.m == 2

    def test_rejects_nonfinite_or_empty(self):
        with pytest.raises(ValueError):
            MeasurementBatch(np.array([[np.nan]]))
        with pytest.raises(ValueError):
            MeasurementBatch(np.zeros((0, 3)))


class TestQmStatistic:
    def test_zero_batch(self):
        assert qm_statistic(MeasurementBatch(np.zeros((3, 4)))) == 0.0

    def test_unit_batch(self):
        assert qm_statistic(MeasurementBatch(np.ones((2, 5)))) == 1.0

    def test_hand_computed(self):
        assert qm_statistic(MeasurementBatch(np.array([[3.0, 4.0]]))) == 12.5


class TestLmStatistic:
    def test_zero_time_mean(self):
        assert lm_statistic(MeasurementBatch(np.array([[2.2, -2.2]]))) == 0.0

    def test_unit_batch(self):
        assert lm_statistic(MeasurementBatch(np.ones((3, 3)))) == 1.0

    def test_hand_computed(self):
        batch = MeasurementBatch(np.array([[1.0, 3.0], [2.0, 2.0]]))
        assert lm_statistic(batch) == 4.0


class TestLlrStatistic:
    def test_identical_hypotheses_give_zero(self):
        # zero-power transmitter at unit distance, no shadowing: the two
        # densities coincide, so the statistic vanishes for every batch
        from coopsense.scenario import NoiseParams, PropagationParams, build_hypothesis_model, sample_placement

        rng = np.random.default_rng(5)
        placement = sample_placement(rng, 3, 0.0, 1.0)
        model = build_hypothesis_model(
            placement,
            PropagationParams(transmit_power_dbm=0.0),
            NoiseParams(1.0, 0.0, 0.14),
            2,
        )
        for _ in range(5):
            batch = MeasurementBatch(rng.standard_normal((3, 2)))
            assert llr_statistic(batch, model) == pytest.approx(0.0, abs=1e-14)

    def test_matches_generic_density_oracle(self):
        model = make_model(seed=1, n=2, m=2, alpha=3.0)
        rng = np.random.default_rng(6)
        busy, idle = h1_moments(model), h0_moments(model)
        for _ in range(10):
            batch = MeasurementBatch(rng.standard_normal((2, 2)) * 2.0)
            oracle = (
                multivariate_normal.logpdf(batch.vector, busy.mean, busy.cov)
                - multivariate_normal.logpdf(batch.vector, idle.mean, idle.cov)
            ) / model.nm
            assert llr_statistic(batch, model) == pytest.approx(oracle, abs=1e-8)

    def test_shape_mismatch_rejected(self):
        model = make_model(seed=1, n=2, m=2)
        with pytest.raises(ValueError):
            llr_statistic(MeasurementBatch(np.zeros((3, 2))), model)


class TestGllrStatistic:
    def test_hand_computed_scalar_case(self):
        batch = MeasurementBatch(np.array([[1.0, 2.0, 3.0]]))
        expected = 0.5 * math.log(1.5) + 11.0 / 6.0  # full-rank scalar case by hand
        assert gllr_statistic(batch, 1.0, 2.0) == pytest.approx(expected, abs=1e-12)

    def test_identical_slots_take_the_loading_path(self):
        col = np.array([[1.0], [2.0], [-0.5]])
        batch = MeasurementBatch(np.repeat(col, 4, axis=1))
        value = gllr_statistic(batch, 1.0, 3.0)
        assert math.isfinite(value)

    def test_sensor_permutation_invariance(self):
        rng = np.random.default_rng(7)
        values = rng.standard_normal((5, 4))
        perm = rng.permutation(5)
        a = gllr_statistic(MeasurementBatch(values), 1.0, 2.5)
        b = gllr_statistic(MeasurementBatch(values[perm]), 1.0, 2.5)
        assert a == pytest.approx(b, rel=1e-10)

    def test_needs_at_least_two_slots(self):
        with pytest.raises(ValueError):
            gllr_statistic(MeasurementBatch(np.ones((3, 1))), 1.0, 2.0)


class TestQuadraticForm:
    def test_qm_form_by_inspection(self):
        model = make_model(seed=2, n=3, m=2)
        qf = quadratic_form(StatisticKind.QM, model)
        assert np.array_equal(qf.a, np.eye(6) / 6.0)
        assert np.all(qf.b == 0.0) and qf.c == 0.0

    def test_lm_form_matches_direct(self):
        model = make_model(seed=3, n=3, m=4)
        qf = quadratic_form(StatisticKind.LM, model)
        rng = np.random.default_rng(8)
        for _ in range(20):
            batch = MeasurementBatch(rng.standard_normal((3, 4)))
            direct = lm_statistic(batch)
            assert qf.evaluate(batch.vector) == pytest.approx(
                direct, rel=1e-12, abs=1e-14
            )

    def test_llr_form_matches_direct(self):
        model = make_model(seed=4, n=4, m=3, alpha=2.0)
        qf = quadratic_form(StatisticKind.LLR, model)
        rng = np.random.default_rng(9)
        for _ in range(20):
            batch = MeasurementBatch(rng.standard_normal((4, 3)) * 3.0 + 1.0)
            direct = llr_statistic(batch, model)
            assert qf.evaluate(batch.vector) == pytest.approx(
                direct, rel=1e-10, abs=1e-12
            )

    def test_gllr_has_no_form(self):
        model = make_model(seed=5, n=2, m=3)
        with pytest.raises(UnsupportedStatisticError):
            quadratic_form(StatisticKind.GLLR, model)


class TestDistributedEvaluation:
    @given(batch_arrays())
    def test_qm_fusion_is_bit_exact(self, values):
        batch = MeasurementBatch(values)
        assert distributed_evaluate(StatisticKind.QM, batch) == qm_statistic(batch)

    @given(batch_arrays())
    def test_lm_fusion_is_bit_exact(self, values):
        batch = MeasurementBatch(values)
        assert distributed_evaluate(StatisticKind.LM, batch) == lm_statistic(batch)

    def test_single_sensor_reduces_to_its_summary(self):
        batch = MeasurementBatch(np.array([[1.0, 2.0, 3.0]]))
        assert distributed_evaluate(StatisticKind.QM, batch) == pytest.approx(
            (1 + 4 + 9) / 3
        )
        assert distributed_evaluate(StatisticKind.LM, batch) == pytest.approx(4.0)

    def test_llr_has_no_distributed_form(self):
        with pytest.raises(UnsupportedStatisticError):
            distributed_evaluate(StatisticKind.LLR, MeasurementBatch(np.ones((2, 2))))


class TestStatisticProperties:
    @given(batch_arrays())
    def test_qm_dominates_lm(self, values):
        batch = MeasurementBatch(values)
        # Cauchy-Schwarz: per-sensor quadratic mean >= squared linear mean
        assert qm_statistic(batch) >= lm_statistic(batch) - 1e-12

    @given(batch_arrays(), st.floats(min_value=-4.0, max_value=4.0))
    def test_quadratic_scaling(self, values, lam):
        batch = MeasurementBatch(values)
        scaled = MeasurementBatch(lam * values)
        assert qm_statistic(scaled) == pytest.approx(
            lam * lam * qm_statistic(batch), rel=1e-9, abs=1e-9
        )
        assert lm_statistic(scaled) == pytest.approx(
            lam * lam * lm_statistic(batch), rel=1e-9, abs=1e-9
        )

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000))
    def test_permutation_invariances(self, seed):
        rng = np.random.default_rng(seed)
        n, m = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        values = rng.standard_normal((n, m))
        sensor_perm = rng.permutation(n)
        slot_perm = rng.permutation(m)
        batch = MeasurementBatch(values)
        by_sensor = MeasurementBatch(values[sensor_perm])
        by_slot = MeasurementBatch(values[:, slot_perm])
        # QM and LM: invariant under both relabelings
        for stat in (qm_statistic, lm_statistic):
            assert stat(by_sensor) == pytest.approx(stat(batch), rel=1e-12)
            assert stat(by_slot) == pytest.approx(stat(batch), rel=1e-12)
        # GLLR: sensor relabeling only
        assert gllr_statistic(by_sensor, 1.0, 2.0) == pytest.approx(
            gllr_statistic(batch, 1.0, 2.0), rel=1e-9
        )
        # LLR: slot relabeling only (the model pins sensor identities)
        model = make_model(seed=seed, n=n, m=m, alpha=1.5)
        assert llr_statistic(by_slot, model) == pytest.approx(
            llr_statistic(batch, model), rel=1e-10, abs=1e-12
        )
