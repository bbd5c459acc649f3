"""Tests for noiseless verification, SINR computation, and slope estimation."""

from fractions import Fraction

import numpy as np
import pytest

from mrc_dof_lab.analysis import (
    DofReport,
    decode_mse_sweep,
    estimate_dof_slope,
    format_number,
    report_csv_row,
    reproduce_table1,
    simulate_report,
    stream_sinrs,
    validate_power_grid,
    verify_noiseless,
)
from mrc_dof_lab.bounds import cutset_dof
from mrc_dof_lab.channel import NetworkConfig, generate_channels
from mrc_dof_lab.ssa_nc import design_scheme

GRID = [1e2, 1e3, 1e4, 1e5, 1e6]


def plan_for(k, m, n, seed=0):
    cfg = NetworkConfig(K=k, M=m, N=n, seed=seed)
    rng = cfg.trial_rng(0)
    cs = generate_channels(cfg, rng)
    return design_scheme(cfg, cs, rng)


class TestVerifyNoiseless:
    def test_3_3_2(self):
        rep = verify_noiseless(NetworkConfig(K=3, M=3, N=2, seed=1), 25)
        assert rep.achieved_streams == 6 == rep.cutset
        assert rep.noiseless_max_error <= 1e-8
        assert rep.L == 1 and rep.d == 1

    def test_5_5_4(self):
        rep = verify_noiseless(NetworkConfig(K=5, M=5, N=4, seed=2), 10)
        assert rep.achieved_streams == 20 == cutset_dof(5, 5, 4)
        assert rep.noiseless_max_error <= 1e-8

    def test_k2_two_way_relay(self):
        rep = verify_noiseless(NetworkConfig(K=2, M=2, N=1, seed=3), 10)
        assert rep.achieved_streams == 2
        assert rep.private_only is None
        assert "degenerate" in rep.notes

    def test_error_invariant_to_power(self):
        cfg_lo = NetworkConfig(K=3, M=3, N=2, P=1.0, seed=4)
        cfg_hi = NetworkConfig(K=3, M=3, N=2, P=1e6, seed=4)
        a = verify_noiseless(cfg_lo, 5).noiseless_max_error
        b = verify_noiseless(cfg_hi, 5).noiseless_max_error
        assert a == pytest.approx(b, rel=1e-6)

    def test_fixed_channels_reused(self):
        cfg = NetworkConfig(K=3, M=3, N=2, seed=5)
        cs = generate_channels(cfg, cfg.rng())
        rep = verify_noiseless(cfg, 5, channels=cs)
        assert rep.noiseless_max_error <= 1e-8


class TestStreamSinrs:
    def test_shapes(self):
        eff, plan = plan_for(4, 4, 3, seed=6)
        s = stream_sinrs(plan, 10.0)
        assert s.mac.shape == (3, 1)
        assert s.bc.shape == (4, 3, 1)
        assert s.end_to_end.shape == (4, 3, 1)
        assert s.flat().size == 12

    def test_min_of_phases(self):
        eff, plan = plan_for(3, 3, 2, seed=7)
        s = stream_sinrs(plan, 5.0)
        assert np.all(s.end_to_end <= s.bc + 1e-12)
        for u in range(3):
            assert np.all(s.end_to_end[u] <= s.mac + 1e-12)

    def test_exact_homogeneity_in_power(self):
        eff, plan = plan_for(3, 3, 2, seed=8)
        s1 = stream_sinrs(plan, 3.0)
        s10 = stream_sinrs(plan, 30.0)
        assert np.allclose(s10.mac, 10.0 * s1.mac, rtol=1e-14, atol=0.0)
        assert np.allclose(s10.bc, 10.0 * s1.bc, rtol=1e-14, atol=0.0)

    def test_vanishes_with_power(self):
        eff, plan = plan_for(3, 3, 2, seed=9)
        assert float(stream_sinrs(plan, 1e-12).flat().max()) < 1e-6

    def test_matches_monte_carlo(self):
        # brute-force noise-draw oracle: empirical signal power over
        # empirical shaped-noise power, 1e5 draws, within 5 percent
        eff, plan = plan_for(3, 3, 2, seed=10)
        P = 10.0
        cf = stream_sinrs(plan, P)
        g = np.random.default_rng(99)
        draws = 10**5
        halves = np.sqrt(2.0)
        s1 = (g.standard_normal((plan.d, draws)) + 1j * g.standard_normal((plan.d, draws))) / halves
        s2 = (g.standard_normal((plan.d, draws)) + 1j * g.standard_normal((plan.d, draws))) / halves
        sig = np.mean(np.abs(s1 + s2) ** 2, axis=1)
        a = plan.power_scale * np.sqrt(P)
        z = (
            g.standard_normal((plan.effective_N, draws))
            + 1j * g.standard_normal((plan.effective_N, draws))
        ) / halves
        for p in range(plan.num_pairs):
            noise = np.mean(np.abs(plan.relay_filter[p] @ z / a) ** 2, axis=1)
            assert sig / noise == pytest.approx(cf.mac[p], rel=0.05)
        b = plan.bc_scale * np.sqrt(P)
        zu = (
            g.standard_normal((plan.effective_M, draws))
            + 1j * g.standard_normal((plan.effective_M, draws))
        ) / halves
        for u in range(3):
            for p in range(plan.num_pairs):
                noise = np.mean(np.abs(plan.rx_filter[u][p] @ zu / b) ** 2, axis=1)
                assert sig / noise == pytest.approx(cf.bc[u, p], rel=0.05)


class TestSlopeEstimation:
    def test_grid_validation(self):
        with pytest.raises(ValueError):
            validate_power_grid([1.0, 2.0])
        with pytest.raises(ValueError):
            validate_power_grid([1e2, 1e2, 1e3])
        with pytest.raises(ValueError):
            validate_power_grid([1.0, 5.0, 10.0])

    def test_two_way_relay_slope(self):
        cfg = NetworkConfig(K=2, M=1, N=1, seed=11)
        slope, stderr = estimate_dof_slope(cfg, GRID, 50)
        assert slope == pytest.approx(2.0, rel=0.05)
        assert stderr >= 0.0

    def test_half_duplex_halves_exactly(self):
        full = NetworkConfig(K=3, M=3, N=2, seed=12, duplex_factor=1.0)
        half = NetworkConfig(K=3, M=3, N=2, seed=12, duplex_factor=0.5)
        s_full, _ = estimate_dof_slope(full, GRID, 10)
        s_half, _ = estimate_dof_slope(half, GRID, 10)
        assert s_half == 0.5 * s_full

    def test_slope_never_exceeds_bound(self):
        for k, m, n in [(3, 3, 2), (3, 4, 3), (4, 4, 3)]:
            cfg = NetworkConfig(K=k, M=m, N=n, seed=13)
            slope, _ = estimate_dof_slope(cfg, GRID, 20)
            assert slope <= cutset_dof(k, m, n) * 1.05


class TestMseSweep:
    def test_monotone_decreasing(self):
        cfg = NetworkConfig(K=3, M=3, N=2, seed=14)
        mse = decode_mse_sweep(cfg, [1e2, 1e3, 1e4], 20)
        assert np.all(np.diff(mse) < 0)


class TestReports:
    def test_csv_row_and_header(self):
        rep = verify_noiseless(NetworkConfig(K=3, M=3, N=2, seed=15), 5)
        row = report_csv_row(rep)
        cells = row.split(",")
        assert cells[0] == "3" and cells[5] == "6" and cells[6] == "6"
        assert cells[8] == "" and cells[9] == ""  # no slope estimated

    def test_simulate_report_includes_slope(self):
        rep = simulate_report(NetworkConfig(K=3, M=3, N=2, seed=16), GRID, 10)
        assert rep.slope_estimate is not None
        assert rep.noiseless_max_error <= 1e-8
        doc = rep.to_json_dict()
        assert doc["streams"] == 6 and doc["slope"] == rep.slope_estimate

    def test_report_rejects_stream_excess(self):
        with pytest.raises(ValueError):
            DofReport(
                K=3, M=3, N=2, L=1, d=1, achieved_streams=7, cutset=6,
                private_only=None, slope_estimate=None, slope_stderr=None,
                noiseless_max_error=0.0, trials=1, degenerate_draws=0,
            )

    def test_format_number(self):
        assert format_number(None) == ""
        assert format_number(Fraction(6)) == "6"
        assert format_number(Fraction(24, 7)) == repr(24 / 7)
        assert format_number(3) == "3"
        assert format_number(2.5) == "2.5"


class TestTable1:
    def test_k3_m2_sweep(self):
        rows = reproduce_table1(3, 2, [1, 2, 3, 4])
        assert [float(r.private_only) for r in rows] == [2, 4, 6, 6]
        assert [r.cutset for r in rows] == [3, 6, 6, 6]
        assert [float(r.gain) for r in rows] == [1, 2, 0, 0]

    def test_k4_case_2_3_boundary(self):
        # both private-only case formulas evaluate to 2N = 48 at N/M = 12/7
        (row,) = reproduce_table1(4, 14, [24])
        assert row.private_only == 48
        assert row.case_index in (2, 3)
        assert row.cutset == 4 * 14

    def test_k4_case5(self):
        (row,) = reproduce_table1(4, 1, [3])
        assert row.case_index == 5
        assert row.private_only == 4 and row.cutset == 4

    def test_agrees_with_bounds_module(self):
        from mrc_dof_lab.bounds import bound_row

        for n in range(1, 8):
            (row,) = reproduce_table1(5, 3, [n])
            assert row == bound_row(5, 3, n)
