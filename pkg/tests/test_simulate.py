"""Waveform simulator: labels, regions, suppression behavior."""

from __future__ import annotations

import math

import numpy as np
import pytest

from trifault.simulate import (
    N_SWITCHES,
    NO_FAULT,
    FaultLabel,
    SimConfig,
    detectable_faults,
    label_at_time,
    region_of,
    simulate,
    switch_is_upper,
    switch_name,
    switch_phase_index,
    true_label_at,
)


class TestFaultLabel:
    def test_round_trip_string(self):
        lab = FaultLabel.from_string("101000")
        assert str(lab) == "101000"
        assert lab.switches == frozenset({1, 3})

    def test_from_switches(self):
        assert str(FaultLabel.from_switches([3, 1])) == "101000"
        assert str(FaultLabel.from_switches([])) == "000000"

    def test_normal_is_all_zero(self):
        assert NO_FAULT.is_normal
        assert NO_FAULT.switches == frozenset()
        assert not FaultLabel.from_switches([2]).is_normal

    def test_sorts_normal_first(self):
        labs = [FaultLabel.from_switches([6]), NO_FAULT, FaultLabel.from_switches([1])]
        assert sorted(labs)[0] is labs[1]

    def test_rejects_bad_strings(self):
        with pytest.raises(ValueError):
            FaultLabel.from_string("10100")
        with pytest.raises(ValueError):
            FaultLabel.from_string("10100x")

    def test_rejects_bad_switch_numbers(self):
        with pytest.raises(ValueError):
            FaultLabel.from_switches([0])
        with pytest.raises(ValueError):
            FaultLabel.from_switches([7])


class TestSwitchNaming:
    def test_phase_assignment(self):
        assert [switch_phase_index(s) for s in range(1, 7)] == [0, 0, 1, 1, 2, 2]

    def test_upper_lower_alternation(self):
        assert [switch_is_upper(s) for s in range(1, 7)] == [True, False] * 3

    def test_names(self):
        assert [switch_name(s) for s in range(1, 7)] == ["S1", "S2", "S3", "S4", "S5", "S6"]


class TestRegions:
    def test_sextant_boundaries(self):
        names = [region_of(theta).name for theta in (30, 90, 150, 210, 270, 330)]
        assert names == ["SI", "SII", "SIII", "SIV", "SV", "SVI"]

    def test_wraps_angles(self):
        assert region_of(390.0).name == region_of(30.0).name
        assert region_of(-30.0).name == "SVI"

    def test_detectable_sets(self):
        by_name = {region_of(30 + 60 * k).name: region_of(30 + 60 * k) for k in range(6)}
        assert detectable_faults(by_name["SI"]) == frozenset({2, 3, 6})
        assert detectable_faults(by_name["SII"]) == frozenset({2, 3, 5})
        assert detectable_faults(by_name["SIII"]) == frozenset({2, 4, 5})
        assert detectable_faults(by_name["SIV"]) == frozenset({1, 4, 5})
        assert detectable_faults(by_name["SV"]) == frozenset({1, 4, 6})
        assert detectable_faults(by_name["SVI"]) == frozenset({1, 3, 6})

    def test_switch_is_detectable_where_its_half_cycle_lives(self):
        # an upper switch suppresses its phase's negative half, so it is
        # detectable exactly in regions where that phase is negative
        for theta in range(0, 360, 5):
            region = region_of(float(theta) + 2.5)
            dets = detectable_faults(region)
            for s in range(1, N_SWITCHES + 1):
                sign = region.sign_pattern[switch_phase_index(s)]
                expected = sign < 0 if switch_is_upper(s) else sign > 0
                assert (s in dets) == expected


class TestSimConfigValidation:
    def test_rejects_nonpositive_amplitude(self):
        with pytest.raises(ValueError):
            SimConfig(amplitude=0.0)

    def test_rejects_low_sample_rate(self):
        with pytest.raises(ValueError):
            SimConfig(amplitude=1.0, sample_rate=400.0)

    def test_rejects_leakage_out_of_range(self):
        with pytest.raises(ValueError):
            SimConfig(amplitude=1.0, leakage=1.0)
        with pytest.raises(ValueError):
            SimConfig(amplitude=1.0, leakage=-0.1)


class TestHealthyWaveform:
    def test_sample_count_and_grid(self):
        s = simulate(SimConfig(amplitude=2.0), (), 0.04)
        assert s.n_samples == round(0.04 * 25600)
        assert np.allclose(np.diff(s.t), 1.0 / 25600.0)

    def test_zero_sum_without_noise(self):
        s = simulate(SimConfig(amplitude=16.5), (), 0.04)
        assert np.max(np.abs(s.i_a + s.i_b + s.i_c)) <= 1e-9

    def test_zero_sum_bound_with_noise(self):
        cfg = SimConfig(amplitude=16.5, noise_sigma=0.05, ripple_amplitude=0.12)
        s = simulate(cfg, (), 0.1)
        bound = 3.0 * (cfg.noise_sigma * 6.0 + cfg.ripple_amplitude)
        assert np.max(np.abs(s.i_a + s.i_b + s.i_c)) <= bound

    def test_matches_closed_form(self):
        s = simulate(SimConfig(amplitude=3.0, frequency=50.0), (), 0.02)
        theta = 2.0 * math.pi * 50.0 * s.t
        assert np.allclose(s.i_a, 3.0 * np.sin(theta), atol=1e-9)
        assert np.allclose(s.i_b, 3.0 * np.sin(theta - 2 * math.pi / 3), atol=1e-9)
        assert np.allclose(s.i_c, 3.0 * np.sin(theta + 2 * math.pi / 3), atol=1e-9)

    def test_determinism(self):
        cfg = SimConfig(amplitude=16.5, noise_sigma=0.04, amplitude_drift=0.01, seed=5)
        a = simulate(cfg, (), 0.05)
        b = simulate(cfg, (), 0.05)
        assert np.array_equal(a.i_a, b.i_a)
        assert np.array_equal(a.i_b, b.i_b)
        assert np.array_equal(a.i_c, b.i_c)


class TestSuppression:
    def test_upper_switch_clamps_negative_half(self):
        lab = FaultLabel.from_switches([1])
        s = simulate(SimConfig(amplitude=10.0, leakage=0.0), ((0.0, lab),), 0.04)
        healthy = 10.0 * np.sin(2 * math.pi * 50.0 * s.t)
        neg = healthy < 0
        assert np.max(np.abs(s.i_a[neg])) <= 1e-9
        assert np.allclose(s.i_a[~neg], healthy[~neg], atol=1e-9)

    def test_lower_switch_clamps_positive_half(self):
        lab = FaultLabel.from_switches([4])
        s = simulate(SimConfig(amplitude=10.0, leakage=0.0), ((0.0, lab),), 0.04)
        healthy = 10.0 * np.sin(2 * math.pi * 50.0 * s.t - 2 * math.pi / 3)
        pos = healthy > 0
        assert np.max(np.abs(s.i_b[pos])) <= 1e-9
        assert np.allclose(s.i_b[pos == False], healthy[pos == False], atol=1e-9)  # noqa: E712

    def test_leakage_bound(self):
        lab = FaultLabel.from_switches([1])
        cfg = SimConfig(amplitude=10.0, leakage=0.12)
        s = simulate(cfg, ((0.0, lab),), 0.04)
        healthy = 10.0 * np.sin(2 * math.pi * 50.0 * s.t)
        neg = healthy < 0
        assert np.max(np.abs(s.i_a[neg])) <= cfg.leakage * cfg.amplitude + 1e-9

    def test_other_phases_untouched(self):
        lab = FaultLabel.from_switches([1])
        cfg = SimConfig(amplitude=10.0, noise_sigma=0.03, seed=2)
        healthy = simulate(cfg, (), 0.04)
        faulted = simulate(cfg, ((0.0, lab),), 0.04)
        assert np.array_equal(healthy.i_b, faulted.i_b)
        assert np.array_equal(healthy.i_c, faulted.i_c)

    def test_both_switches_null_the_phase(self):
        lab = FaultLabel.from_switches([1, 2])
        cfg = SimConfig(amplitude=10.0, leakage=0.12)
        s = simulate(cfg, ((0.0, lab),), 0.04)
        assert np.max(np.abs(s.i_a)) <= 1e-9

    def test_mid_run_injection(self):
        lab = FaultLabel.from_switches([1])
        cfg = SimConfig(amplitude=10.0)
        s = simulate(cfg, ((0.015, lab),), 0.04)
        healthy = 10.0 * np.sin(2 * math.pi * 50.0 * s.t)
        pre = s.t < 0.015
        assert np.allclose(s.i_a[pre], healthy[pre], atol=1e-9)
        # at 15 ms the healthy value sits in the suppressed negative half
        k = np.searchsorted(s.t, 0.015)
        assert healthy[k] < 0
        assert abs(s.i_a[k]) <= 1e-9

    def test_all_zero_timeline_equals_no_fault(self):
        cfg = SimConfig(amplitude=16.5, noise_sigma=0.04, amplitude_drift=0.01, seed=9)
        plain = simulate(cfg, (), 0.05)
        zeroed = simulate(cfg, ((0.0, NO_FAULT),), 0.05)
        assert np.array_equal(plain.i_a, zeroed.i_a)
        assert np.array_equal(plain.i_b, zeroed.i_b)
        assert np.array_equal(plain.i_c, zeroed.i_c)


class TestTimeline:
    def test_label_at_time_steps(self):
        lab1 = FaultLabel.from_switches([2])
        lab2 = FaultLabel.from_switches([2, 5])
        timeline = ((0.01, lab1), (0.03, lab2))
        assert label_at_time(timeline, 0.0) is NO_FAULT
        assert label_at_time(timeline, 0.01) == lab1
        assert label_at_time(timeline, 0.0299) == lab1
        assert label_at_time(timeline, 0.03) == lab2
        assert label_at_time(timeline, 1.0) == lab2

    def test_true_label_at_checks_range(self):
        s = simulate(SimConfig(amplitude=1.0), (), 0.02)
        with pytest.raises(ValueError):
            true_label_at(s, 0.05)

    def test_rejects_unsorted_timeline(self):
        lab = FaultLabel.from_switches([1])
        with pytest.raises(ValueError):
            simulate(SimConfig(amplitude=1.0), ((0.02, lab), (0.01, lab)), 0.04)

    def test_rejects_negative_fault_time(self):
        lab = FaultLabel.from_switches([1])
        with pytest.raises(ValueError):
            simulate(SimConfig(amplitude=1.0), ((-0.01, lab),), 0.04)

    def test_timeline_recorded_on_series(self):
        lab = FaultLabel.from_switches([3])
        s = simulate(SimConfig(amplitude=1.0), ((0.01, lab),), 0.04)
        assert s.fault_timeline == ((0.01, lab),)
        assert true_label_at(s, 0.005) is NO_FAULT
        assert true_label_at(s, 0.02) == lab
