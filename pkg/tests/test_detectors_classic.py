"""Behavioral tests for the standard streaming drift detectors.

Each detector family gets: a shift it must catch, a stationary stream it must
stay quiet on, its warm-up contract, and a reset/replay determinism check.
ADWIN additionally gets a window-integrity oracle: because it only ever drops
the oldest buckets, its kept window is always a contiguous suffix of the
stream, so total/variance/width can be recomputed from raw history.
"""
import math

import numpy as np
import pytest

from driftlab.detectors import (
    AdwinDetector,
    DdmDetector,
    EddmDetector,
    HddmAverageDetector,
    HddmWeightedDetector,
    KswinDetector,
    Outcome,
    PageHinkleyDetector,
    make_detector,
)


def replay(detector, values):
    return [detector.update(float(x)) for x in values]


def first_index(outcomes, wanted):
    return next((i for i, o in enumerate(outcomes) if o is wanted), None)


# ---------------------------------------------------------------------------
# ADWIN
# ---------------------------------------------------------------------------


class TestAdwin:
    def test_delta_validated(self):
        with pytest.raises(ValueError):
            AdwinDetector(delta=0.0)
        with pytest.raises(ValueError):
            AdwinDetector(delta=1.0)

    def test_quiet_on_stationary_bernoulli(self):
        rng = np.random.default_rng(11)
        detector = AdwinDetector()
        outcomes = replay(detector, (rng.random(2000) < 0.5).astype(float))
        assert Outcome.DRIFT not in outcomes

    def test_detects_mean_shift_and_forgets_old_data(self):
        rng = np.random.default_rng(2)
        stream = np.concatenate(
            [
                (rng.random(1000) < 0.2).astype(float),
                (rng.random(500) < 0.8).astype(float),
            ]
        )
        detector = AdwinDetector()
        outcomes = replay(detector, stream)
        drift_at = first_index(outcomes, Outcome.DRIFT)
        assert drift_at is not None and 1000 <= drift_at < 1100
        # after shrinking, the window should reflect the new regime
        assert detector.estimation > 0.6

    def test_window_is_true_suffix_of_stream(self):
        """Integrity oracle: the histogram's aggregates must equal the exact
        sum / squared-deviation / count of the last ``width`` raw values."""
        rng = np.random.default_rng(5)
        stream = np.concatenate(
            [rng.normal(0.0, 1.0, 300), rng.normal(4.0, 1.0, 300)]
        )
        detector = AdwinDetector()
        seen: list[float] = []
        for x in stream:
            detector.update(float(x))
            seen.append(float(x))
            kept = np.asarray(seen[len(seen) - detector.width :])
            assert detector.width == detector.n_seen - detector.n_dropped
            assert math.isclose(detector.total, float(kept.sum()), rel_tol=1e-9, abs_tol=1e-9)
            m2 = float(((kept - kept.mean()) ** 2).sum())
            assert math.isclose(detector.variance, m2, rel_tol=1e-6, abs_tol=1e-6)
        assert detector.n_dropped > 0  # the shift actually forced cuts

    def test_filling_until_min_window(self):
        detector = AdwinDetector()
        for i in range(10):
            detector.update(float(i % 2))
            assert detector.filling
        detector.update(1.0)
        assert not detector.filling


# ---------------------------------------------------------------------------
# DDM
# ---------------------------------------------------------------------------


class TestDdm:
    def test_warm_up_is_silent(self):
        detector = DdmDetector()
        assert replay(detector, [i % 2 for i in range(29)]) == [Outcome.NORMAL] * 29

    def test_warning_precedes_drift_on_error_rate_ramp(self):
        errors = [1.0 if i % 5 == 0 else 0.0 for i in range(200)]
        errors += [1.0 if i % 2 == 0 else 0.0 for i in range(200)]
        outcomes = replay(DdmDetector(), errors)
        warn_at = first_index(outcomes, Outcome.WARNING)
        drift_at = first_index(outcomes, Outcome.DRIFT)
        assert warn_at is not None and drift_at is not None
        assert 200 <= warn_at < drift_at < 400
        assert Outcome.DRIFT not in outcomes[:200]

    def test_inert_outside_unit_interval(self):
        """Raw price levels push the running mean far above 1, the binomial
        variance goes negative, and the tests stay suspended."""
        rng = np.random.default_rng(7)
        prices = 100.0 * np.exp(np.cumsum(rng.normal(0, 0.05, 400)))
        outcomes = replay(DdmDetector(), prices)
        assert set(outcomes) == {Outcome.NORMAL}

    def test_self_reset_after_drift(self):
        errors = [1.0 if i % 5 == 0 else 0.0 for i in range(200)]
        errors += [1.0] * 50
        detector = DdmDetector()
        outcomes = replay(detector, errors)
        drift_at = first_index(outcomes, Outcome.DRIFT)
        assert drift_at is not None
        # fresh start: the next 29 updates fall inside a new warm-up
        tail = outcomes[drift_at + 1 : drift_at + 30]
        assert set(tail) <= {Outcome.NORMAL}

    def test_replay_after_reset_is_identical(self):
        rng = np.random.default_rng(3)
        values = (rng.random(300) < 0.3).astype(float)
        detector = DdmDetector()
        first = replay(detector, values)
        detector.reset()
        assert replay(detector, values) == first


# ---------------------------------------------------------------------------
# EDDM
# ---------------------------------------------------------------------------


class TestEddm:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_inert_on_real_valued_streams(self, seed):
        """With every sample an event the inter-event distance is constant,
        so no real-valued stream can move the statistic: always Normal."""
        rng = np.random.default_rng(seed)
        stream = np.concatenate(
            [
                rng.normal(100, 1, 200),
                rng.normal(500, 50, 200),
                (rng.random(200) < 0.5).astype(float),
            ]
        )
        outcomes = replay(EddmDetector(), stream)
        assert set(outcomes) == {Outcome.NORMAL}

    def test_inert_even_on_binary_error_streams(self):
        errors = [1.0 if i % 5 == 0 else 0.0 for i in range(200)]
        errors += [1.0] * 100
        assert set(replay(EddmDetector(), errors)) == {Outcome.NORMAL}


# ---------------------------------------------------------------------------
# Page-Hinkley
# ---------------------------------------------------------------------------


class TestPageHinkley:
    def test_quiet_on_constant_stream(self):
        outcomes = replay(PageHinkleyDetector(), [100.0] * 500)
        assert set(outcomes) == {Outcome.NORMAL}

    def test_upward_step_detected(self):
        stream = [0.0] * 100 + [5.0] * 100
        outcomes = replay(PageHinkleyDetector(), stream)
        drift_at = first_index(outcomes, Outcome.DRIFT)
        assert drift_at is not None and 100 <= drift_at < 130

    def test_downward_step_ignored(self):
        """The accumulator clamps at zero, so only upward shifts count."""
        stream = [100.0] * 100 + [0.0] * 200
        assert Outcome.DRIFT not in replay(PageHinkleyDetector(), stream)

    def test_min_instances_gate(self):
        """The accumulator blows past the threshold at update 11, but the
        verdict is withheld until exactly ``min_instances`` updates."""
        detector = PageHinkleyDetector()
        outcomes = replay(detector, [0.0] * 10 + [1e6] * 20)
        assert outcomes[:29] == [Outcome.NORMAL] * 29
        assert outcomes[29] is Outcome.DRIFT

    def test_self_reset_and_replay(self):
        stream = ([0.0] * 60 + [10.0] * 60) * 2
        detector = PageHinkleyDetector()
        first = replay(detector, stream)
        assert first.count(Outcome.DRIFT) >= 2  # reset re-arms the test
        detector.reset()
        assert replay(detector, stream) == first


# ---------------------------------------------------------------------------
# KSWIN
# ---------------------------------------------------------------------------


class TestKswin:
    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            KswinDetector(alpha=0.0)
        with pytest.raises(ValueError):
            KswinDetector(alpha=1.5)
        with pytest.raises(ValueError):
            KswinDetector(window_size=30, stat_size=30)

    def test_fill_phase_is_window_size_updates(self):
        detector = KswinDetector(seed=0)
        rng = np.random.default_rng(0)
        outcomes = replay(detector, rng.normal(0, 1, 100))
        assert outcomes == [Outcome.NORMAL] * 100
        assert detector.filling
        detector.update(0.0)
        assert not detector.filling

    def test_distribution_shift_detected(self):
        rng = np.random.default_rng(1)
        stream = np.concatenate([rng.normal(0, 1, 300), rng.normal(5, 1, 100)])
        outcomes = replay(KswinDetector(seed=1), stream)
        drift_at = first_index(outcomes, Outcome.DRIFT)
        assert drift_at is not None and 300 <= drift_at < 340

    def test_window_shrinks_after_drift(self):
        rng = np.random.default_rng(1)
        stream = np.concatenate([rng.normal(0, 1, 300), rng.normal(5, 1, 100)])
        detector = KswinDetector(seed=1)
        outcomes = replay(detector, stream)
        assert Outcome.DRIFT in outcomes
        # the retained window restarts below capacity, so filling resumes
        detector.update(5.0)
        assert detector.filling

    def test_same_seed_same_decisions(self):
        rng = np.random.default_rng(8)
        stream = list(np.concatenate([rng.normal(0, 1, 200), rng.normal(3, 1, 200)]))
        a = replay(KswinDetector(seed=42), stream)
        b = replay(KswinDetector(seed=42), stream)
        assert a == b

    def test_reset_reseeds_generator(self):
        rng = np.random.default_rng(8)
        stream = list(np.concatenate([rng.normal(0, 1, 200), rng.normal(3, 1, 200)]))
        detector = KswinDetector(seed=7)
        first = replay(detector, stream)
        detector.reset()
        assert replay(detector, stream) == first


# ---------------------------------------------------------------------------
# HDDM
# ---------------------------------------------------------------------------


class TestHddmA:
    def test_detects_upward_shift(self):
        rng = np.random.default_rng(4)
        stream = np.concatenate(
            [(rng.random(400) < 0.1).astype(float), (rng.random(200) < 0.9).astype(float)]
        )
        outcomes = replay(HddmAverageDetector(), stream)
        drift_at = first_index(outcomes, Outcome.DRIFT)
        assert drift_at is not None and 400 <= drift_at < 450

    def test_two_sided_flag_controls_downward_detection(self):
        rng = np.random.default_rng(4)
        stream = np.concatenate(
            [(rng.random(400) < 0.9).astype(float), (rng.random(400) < 0.1).astype(float)]
        )
        two_sided = replay(HddmAverageDetector(two_sided=True), stream)
        one_sided = replay(HddmAverageDetector(two_sided=False), stream)
        assert Outcome.DRIFT in two_sided
        assert Outcome.DRIFT not in one_sided

    def test_quiet_on_stationary(self):
        rng = np.random.default_rng(12)
        stream = (rng.random(2000) < 0.5).astype(float)
        assert Outcome.DRIFT not in replay(HddmAverageDetector(), stream)

    def test_replay_after_reset(self):
        rng = np.random.default_rng(0)
        stream = np.concatenate(
            [(rng.random(300) < 0.2).astype(float), (rng.random(300) < 0.8).astype(float)]
        )
        detector = HddmAverageDetector()
        first = replay(detector, stream)
        detector.reset()
        assert replay(detector, stream) == first


class TestHddmW:
    def test_detects_upward_shift(self):
        rng = np.random.default_rng(4)
        stream = np.concatenate(
            [(rng.random(400) < 0.1).astype(float), (rng.random(200) < 0.9).astype(float)]
        )
        outcomes = replay(HddmWeightedDetector(), stream)
        drift_at = first_index(outcomes, Outcome.DRIFT)
        assert drift_at is not None and 400 <= drift_at < 460

    def test_detects_downward_shift_two_sided(self):
        rng = np.random.default_rng(4)
        stream = np.concatenate(
            [(rng.random(400) < 0.9).astype(float), (rng.random(400) < 0.1).astype(float)]
        )
        assert Outcome.DRIFT in replay(HddmWeightedDetector(), stream)

    def test_rarely_fires_on_stationary(self):
        """The EWMA cutpoint scheme keeps the low-water snapshot of the mean,
        which makes it alarm occasionally even without drift; a handful of
        alarms per 2000 stationary samples is its documented character, while
        a broken bound would fire hundreds of times."""
        rng = np.random.default_rng(13)
        stream = (rng.random(2000) < 0.5).astype(float)
        outcomes = replay(HddmWeightedDetector(), stream)
        assert outcomes.count(Outcome.DRIFT) <= 5

    def test_replay_after_reset(self):
        rng = np.random.default_rng(1)
        stream = np.concatenate(
            [(rng.random(300) < 0.2).astype(float), (rng.random(300) < 0.8).astype(float)]
        )
        detector = HddmWeightedDetector()
        first = replay(detector, stream)
        detector.reset()
        assert replay(detector, stream) == first


# ---------------------------------------------------------------------------
# Factory + shared input contract
# ---------------------------------------------------------------------------


ALL_KINDS = ["myTanDD", "MINPS", "mySD", "ADWIN", "DDM", "EDDM", "KSWIN", "PH", "HDDM_A", "HDDM_W"]


def test_factory_builds_every_kind():
    for kind in ALL_KINDS:
        detector = make_detector(kind, seed=3)
        assert detector.update(1.0) is Outcome.NORMAL


def test_factory_rejects_unknown_kind():
    with pytest.raises(ValueError, match="unknown detector"):
        make_detector("nope")


def test_factory_forwards_parameters():
    detector = make_detector("PH", threshold=10.0, min_instances=5)
    assert detector.threshold == 10.0
    assert detector.min_instances == 5


def test_factory_seed_reaches_sampling_detector():
    rng = np.random.default_rng(8)
    stream = list(np.concatenate([rng.normal(0, 1, 200), rng.normal(3, 1, 200)]))
    a = replay(make_detector("KSWIN", seed=5), stream)
    b = replay(make_detector("KSWIN", seed=5), stream)
    assert a == b


@pytest.mark.parametrize("kind", ALL_KINDS)
@pytest.mark.parametrize("bad", [float("nan"), float("inf"), True, "1.0", None])
def test_update_rejects_non_finite_and_non_numeric(kind, bad):
    detector = make_detector(kind)
    with pytest.raises(ValueError):
        detector.update(bad)
