import numpy as np
import pytest

from cpgsnn.circuit import (
    CircuitParams,
    NeverFiresError,
    circular_cross_correlation,
    derive_currents,
    first_spike_time,
    first_spike_time_uncorrected,
    simulate_circuit,
    simulate_first_spike,
    verify_grid,
    verify_period,
)


class TestFirstSpike:
    @pytest.mark.parametrize("beta", [0.5, 0.8, 0.9, 0.95])
    @pytest.mark.parametrize("i_c", [0.11, 0.3, 0.55, 0.9, 2.0])
    def test_closed_form_matches_brute_force(self, beta, i_c):
        if i_c / (1 - beta) <= 1.0:
            with pytest.raises(NeverFiresError):
                first_spike_time(beta, 1.0, i_c)
            return
        assert first_spike_time(beta, 1.0, i_c) == simulate_first_spike(
            beta, 1.0, i_c
        )

    def test_huge_current_fires_immediately(self):
        assert first_spike_time(0.9, 1.0, 100.0) == 1
        assert simulate_first_spike(0.9, 1.0, 100.0) == 1

    def test_derived_current_count_shows_offset(self):
        # the recurrence reaches threshold one step earlier than the label R
        # used to derive the current; the published closed form recovers R
        beta = 0.9
        i_c1, _ = derive_currents(beta, 1.0, 5, 4)
        assert simulate_first_spike(beta, 1.0, i_c1) == 4
        assert first_spike_time_uncorrected(beta, 1.0, i_c1) == 5

    def test_published_form_is_one_step_late(self):
        # in the interior of the firing regime the stated closed form counts
        # one extra step relative to the recurrence
        for i_c in (0.2, 0.3, 0.5):
            exact = first_spike_time(0.9, 1.0, i_c)
            stated = first_spike_time_uncorrected(0.9, 1.0, i_c)
            assert stated == exact + 1

    def test_subthreshold_current_raises(self):
        # steady state I_c/(1-beta) below threshold: no spike ever
        with pytest.raises(NeverFiresError):
            first_spike_time(0.9, 1.0, 0.05)
        with pytest.raises(NeverFiresError):
            simulate_first_spike(0.9, 1.0, 0.05, max_steps=1000)

    def test_nonpositive_current_rejected(self):
        with pytest.raises(NeverFiresError):
            first_spike_time(0.9, 1.0, 0.0)


class TestDeriveCurrents:
    def test_frozen_values(self):
        # beta=0.9: i_c1(R=5) = 0.09/(0.9-0.59049), i_c2(K=4) = 0.09/(0.9-0.729)
        i_c1, i_c2 = derive_currents(0.9, 1.0, 5, 4)
        assert i_c1 == pytest.approx(0.09 / (0.9 - 0.9**5), rel=1e-12)
        assert i_c1 == pytest.approx(0.290782, abs=1e-6)
        assert i_c2 == pytest.approx(0.526316, abs=1e-6)

    def test_degenerate_r_rejected(self):
        with pytest.raises(ValueError, match="R=1"):
            derive_currents(0.9, 1.0, 1, 4)

    def test_degenerate_k_rejected(self):
        with pytest.raises(ValueError, match="zero"):
            derive_currents(0.9, 1.0, 5, 2)

    def test_scales_with_threshold(self):
        a = derive_currents(0.8, 1.0, 4, 5)
        b = derive_currents(0.8, 2.0, 4, 5)
        assert b[0] == pytest.approx(2 * a[0])
        assert b[1] == pytest.approx(2 * a[1])


class TestCircuitSimulation:
    def test_reference_pattern_bit_exact(self):
        params = CircuitParams.for_pattern(0.9, r_steps=5, k_steps=3)
        trace = simulate_circuit(params, 4 * params.period)
        got = "".join(str(int(s)) for s in trace.s_e)
        assert got == "00000111" * 4

    def test_resetter_fires_once_per_period(self):
        params = CircuitParams.for_pattern(0.9, r_steps=5, k_steps=3)
        trace = simulate_circuit(params, 5 * params.period)
        for k in range(1, 5):
            window = trace.s_r[k * params.period:(k + 1) * params.period]
            assert int(window.sum()) == 1

    def test_state_recurrence_at_period_boundaries(self):
        params = CircuitParams.for_pattern(0.8, r_steps=3, k_steps=4)
        report = verify_period(params, n_periods=6)
        assert report["pass"]
        assert report["state_recurrence_error"] <= 1e-9

    def test_nonzero_reset_potential(self):
        params = CircuitParams.for_pattern(
            0.9, v_reset=-0.2, r_steps=4, k_steps=3
        )
        report = verify_period(params, n_periods=5)
        assert report["pass"]

    def test_detuned_current_breaks_pattern(self):
        # negative control: nudging i_c1 shifts the rest length
        params = CircuitParams.for_pattern(0.9, r_steps=5, k_steps=3)
        bad = CircuitParams(
            params.beta, params.u_thr, params.v_reset,
            params.r_steps, params.k_steps,
            params.i_c1 * 1.3, params.i_c2,
        )
        report = verify_period(bad, n_periods=5)
        assert not report["pattern_ok"]

    def test_too_short_simulation_rejected(self):
        params = CircuitParams.for_pattern(0.9, r_steps=5, k_steps=3)
        with pytest.raises(ValueError, match="period"):
            simulate_circuit(params, 3)

    def test_trace_current_schedule(self):
        # steps before the first spike inject the bare base current
        params = CircuitParams.for_pattern(0.9, r_steps=5, k_steps=3)
        trace = simulate_circuit(params, params.period)
        assert np.allclose(trace.i_e[1:6], params.i_c1)
        assert np.allclose(trace.i_r[1:6], 0.0)


class TestGrid:
    def test_small_grid_all_pass(self):
        report = verify_grid(
            betas=(0.5, 0.9), r_values=range(2, 5), k_values=range(3, 5),
            v_resets=(0.0, -0.2), n_periods=3,
        )
        assert report["n_cases"] == 2 * 3 * 2 * 2
        assert report["all_pass"]
        assert report["n_failed"] == 0


class TestCrossCorrelation:
    def test_self_correlation_peak_at_zero(self):
        a = np.array([0, 0, 1, 1, 0, 1], dtype=np.uint8)
        c = circular_cross_correlation(a, a)
        assert c[0] == a.sum()
        assert c[0] == c.max()

    def test_shift_detection(self):
        a = np.array([1, 0, 0, 0, 0], dtype=np.uint8)
        b = np.roll(a, 2)
        c = circular_cross_correlation(a, b)
        assert int(np.argmax(c)) == 2  # b[(t+2) mod 5] == a[t]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            circular_cross_correlation(np.ones(3), np.ones(4))
