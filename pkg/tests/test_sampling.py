import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wfsim.circuits import SETTINGS, MeasurementSetting
from wfsim.errors import ValidationError
from wfsim.sampling import (
    CHUNK_SHOTS,
    OUTCOMES,
    CountsTable,
    RunConfig,
    check_seed,
    inverse_cdf,
    outcome_label,
    run_all_settings,
    run_exact,
    run_fusion_demo,
    run_sampled,
    run_w_state,
    sample_counts,
    stream,
)

import oracles
from conftest import multinomial_within

THETA_16 = np.linspace(-math.pi / 2, math.pi / 2, 16)


def oracle_outcome_probs(theta, setting):
    """Outcome distribution from the six-particle reference and the dense setting-stage matrix."""
    vec = oracles.bell_stage_matrix(setting.ks) @ oracles.six_particle_reference(theta)
    p = np.abs(vec) ** 2
    out = dict.fromkeys(OUTCOMES, 0.0)
    for k in range(64):
        a, b, c = (k >> 5) & 1, (k >> 3) & 1, (k >> 1) & 1
        out[(1 - 2 * a, 1 - 2 * b, 1 - 2 * c)] += p[k]
    return out


def test_outcome_order_is_lexicographic_plus_first():
    assert [outcome_label(o) for o in OUTCOMES] == ["+++", "++-", "+-+", "+--", "-++", "-+-", "--+", "---"]


# =============================================================================
# run_exact
# =============================================================================

def test_a1_setting_at_quarter_pi():
    dist = run_exact(math.pi / 4, MeasurementSetting(1, 0, 0))
    for o in OUTCOMES:
        want = 1 / 3 if o in {(1, 1, -1), (1, -1, 1), (-1, 1, 1)} else 0.0
        assert dist[o] == pytest.approx(want, abs=1e-12)


def test_b1c1_setting_at_quarter_pi():
    dist = run_exact(math.pi / 4, MeasurementSetting(0, 1, 1))
    for o in OUTCOMES:
        want = 3 / 8 if o in {(1, 1, 1), (-1, -1, -1)} else 1 / 24
        assert dist[o] == pytest.approx(want, abs=1e-12)


def test_all_record_setting_at_zero_is_fully_anticorrelated():
    dist = run_exact(0.0, MeasurementSetting(0, 0, 0))
    for o, p in dist.items():
        if o[0] * o[1] * o[2] > 0:
            assert p < 1e-24


@pytest.mark.parametrize("setting", SETTINGS, ids=str)
@pytest.mark.parametrize("method", ["rotation", "unitary"])
def test_run_exact_matches_reference_distribution(setting, method):
    for theta in THETA_16:
        dist = run_exact(theta, setting, method)
        assert sum(dist.values()) == pytest.approx(1, abs=1e-12)
        ref = oracle_outcome_probs(theta, setting)
        for o in OUTCOMES:
            assert dist[o] == pytest.approx(ref[o], abs=1e-12)


@pytest.mark.parametrize("setting", SETTINGS, ids=str)
def test_correlators_from_exact_distribution_match_closed_forms(setting):
    for theta in THETA_16:
        dist = run_exact(theta, setting)
        e = sum(o[0] * o[1] * o[2] * p for o, p in dist.items())
        assert e == pytest.approx(oracles.analytic_E(theta)[setting.ks], abs=1e-10)


def test_literal_fusion_flips_odd_correlators():
    theta = 0.3
    for s in SETTINGS:
        dist = run_exact(theta, s, phase_correction=False)
        e = sum(o[0] * o[1] * o[2] * p for o, p in dist.items())
        sign = -1 if s.ks in {(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)} else 1
        assert e == pytest.approx(sign * oracles.analytic_E(theta)[s.ks], abs=1e-10)


def test_run_exact_rejects_unknown_method():
    with pytest.raises(ValidationError):
        run_exact(0.1, SETTINGS[0], "magic")


# =============================================================================
# RNG and inverse-CDF
# =============================================================================

def test_streams_are_reproducible_and_independent():
    a = stream(5, 0, 1, 0).random(4)
    assert np.array_equal(a, stream(5, 0, 1, 0).random(4))
    assert not np.array_equal(a, stream(5, 0, 2, 0).random(4))
    assert not np.array_equal(a, stream(6, 0, 1, 0).random(4))


@pytest.mark.parametrize("seed", [-1, 1 << 64])
def test_seed_range(seed):
    with pytest.raises(ValidationError):
        check_seed(seed)


def test_seed_range_endpoints_accepted():
    assert check_seed(0) == 0
    assert check_seed((1 << 64) - 1) == (1 << 64) - 1


def test_inverse_cdf_boundaries():
    probs = np.array([0.25, 0.0, 0.5, 0.25])
    u = np.array([0.0, 0.2499999, 0.25, 0.7499999, 0.75, 0.9999999])
    assert inverse_cdf(probs, u).tolist() == [0, 0, 2, 2, 3, 3]


@given(st.lists(st.floats(0, 1), min_size=2, max_size=16), st.lists(st.floats(0, 1, exclude_max=True), min_size=1, max_size=50))
@settings(max_examples=200, deadline=None)
def test_inverse_cdf_never_returns_zero_probability_bins(weights, us):
    w = np.array(weights)
    if w.sum() == 0:
        w[0] = 1
    probs = w / w.sum()
    out = inverse_cdf(probs, np.array(us))
    assert np.all((0 <= out) & (out < len(probs)))
    assert np.all(probs[out] > 0)


def test_sample_counts_is_worker_independent():
    probs = np.full(8, 1 / 8)
    shots = 3 * CHUNK_SHOTS + 17
    ref, n = sample_counts(probs, shots, 11, (9,))
    assert n == shots
    for workers in (2, 3, 8):
        counts, _ = sample_counts(probs, shots, 11, (9,), workers=workers)
        assert np.array_equal(counts, ref)


def test_sample_counts_argument_checks():
    with pytest.raises(ValidationError):
        sample_counts([1.0], 0, 0, ())
    with pytest.raises(ValidationError):
        sample_counts([1.0], 1, 0, (), workers=0)


# =============================================================================
# run_sampled
# =============================================================================

def test_run_config_validation():
    s = SETTINGS[0]
    for kwargs in ({"shots": 0}, {"shots": -3}, {"mode": "nope"}, {"w_method": "nope"}, {"seed": -1}):
        with pytest.raises(ValidationError):
            RunConfig(0.1, s, **kwargs)
    with pytest.raises(ValidationError):
        RunConfig(float("nan"), s)


def test_a1_row_counts_near_a_third():
    t = run_sampled(RunConfig(math.pi / 4, MeasurementSetting(1, 0, 0), shots=10_000, seed=3))
    assert t.valid_shots == t.attempted_shots == 10_000
    row = t.row()
    for i, o in enumerate(OUTCOMES):
        if o in {(1, 1, -1), (1, -1, 1), (-1, 1, 1)}:
            assert abs(row[i] - 10_000 / 3) < 5 * math.sqrt(10_000 * 2 / 9)
        else:
            assert row[i] == 0


@pytest.mark.parametrize("setting", SETTINGS, ids=str)
def test_sampled_frequencies_within_five_sigma(setting):
    n = 100_000
    for i, theta in enumerate(THETA_16):
        t = run_sampled(RunConfig(theta, setting, shots=n, seed=1000 + i))
        probs = [run_exact(theta, setting)[o] for o in OUTCOMES]
        assert multinomial_within(t.row(), probs, n)


def test_physical_rejection_keeps_about_an_eighth():
    n = 80_000
    t = run_sampled(RunConfig(math.pi / 4, SETTINGS[1], shots=n, seed=21, mode="physical_rejection"))
    assert t.attempted_shots == n
    sigma = math.sqrt(n * (1 / 8) * (7 / 8))
    assert abs(t.valid_shots - n / 8) < 5 * sigma


@pytest.mark.parametrize("setting", [SETTINGS[0], SETTINGS[6], SETTINGS[7]], ids=str)
def test_physical_and_exact_modes_agree(setting):
    theta = 0.6
    exact = run_sampled(RunConfig(theta, setting, shots=100_000, seed=4))
    phys = run_sampled(RunConfig(theta, setting, shots=800_000, seed=4, mode="physical_rejection"))
    assert phys.valid_shots > 95_000
    f1, f2 = exact.frequencies(), phys.frequencies()
    tv = 0.5 * sum(abs(f1[o] - f2[o]) for o in OUTCOMES)
    assert tv < 0.02


def test_same_seed_same_table():
    cfg = RunConfig(0.7, SETTINGS[5], shots=20_000, seed=99)
    assert run_sampled(cfg) == run_sampled(cfg)
    assert run_sampled(cfg) != run_sampled(RunConfig(0.7, SETTINGS[5], shots=20_000, seed=100))


@pytest.mark.parametrize("mode", ["exact_postselect", "physical_rejection"])
def test_worker_count_does_not_change_tables(mode):
    cfg = RunConfig(math.pi / 4, SETTINGS[7], shots=5 * CHUNK_SHOTS + 3, seed=8, mode=mode)
    ref = run_sampled(cfg)
    for w in (2, 4, 7):
        assert run_sampled(cfg, workers=w) == ref


def test_settings_use_independent_streams():
    tables = run_all_settings(math.pi / 4, 10_000, 1)
    assert [t.setting for t in tables] == list(SETTINGS)
    # settings sharing a distribution still get different counts
    assert tables[2].row() != tables[3].row()


def test_counts_table_invariants():
    t = CountsTable.from_row([1, 2, 3, 4, 5, 6, 7, 8], SETTINGS[0])
    assert t.valid_shots == t.attempted_shots == 36
    assert t.row() == [1, 2, 3, 4, 5, 6, 7, 8]
    assert sum(t.frequencies().values()) == pytest.approx(1)
    with pytest.raises(ValidationError):
        CountsTable({OUTCOMES[0]: 5}, 4, 10)
    with pytest.raises(ValidationError):
        CountsTable({OUTCOMES[0]: 5}, 5, 4)
    with pytest.raises(ValidationError):
        CountsTable.from_row([1, 2, 3])


@given(st.floats(-4, 4), st.sampled_from(SETTINGS), st.integers(0, 2**64 - 1), st.integers(1, 3000))
@settings(max_examples=40, deadline=None)
def test_sampled_tables_are_well_formed(theta, setting, seed, shots):
    t = run_sampled(RunConfig(theta, setting, shots=shots, seed=seed, mode="physical_rejection"))
    assert sum(t.row()) == t.valid_shots <= t.attempted_shots == shots
    assert all(n >= 0 for n in t.row())
    probs = run_exact(theta, setting)
    for o, n in t.counts.items():
        if probs[o] < 1e-15:
            assert n == 0


# =============================================================================
# demos
# =============================================================================

@pytest.mark.parametrize("method", ["rotation", "unitary"])
def test_w_state_histogram(method):
    h = run_w_state(method, shots=8192, seed=2)
    assert list(h.exact) == ["000", "001", "010", "011", "100", "101", "110", "111"]
    for label, p in h.exact.items():
        assert p == pytest.approx(1 / 3 if label.count("1") == 1 else 0, abs=1e-12)
    assert multinomial_within([h.counts[l] for l in h.exact], list(h.exact.values()), 8192)
    assert h.valid_shots == h.attempted_shots == 8192


def test_fusion_demo():
    h = run_fusion_demo(shots=8192, seed=0)
    assert h.wires == ("a", "b", "c", "alpha")
    assert h.success_probability == pytest.approx(0.5, abs=1e-12)
    assert sum(h.exact.values()) == pytest.approx(1, abs=1e-12)
    for label, p in h.exact.items():
        if label[0] == label[3]:
            assert p == 0 and h.counts[label] == 0
    assert abs(h.valid_shots - 4096) < 5 * math.sqrt(8192 / 4)
    assert sum(h.counts.values()) == h.valid_shots
    assert h.success_ratio == h.valid_shots / 8192


def test_fusion_demo_is_seeded():
    assert run_fusion_demo(seed=5) == run_fusion_demo(seed=5)
    assert run_fusion_demo(seed=5, workers=3) == run_fusion_demo(seed=5)
