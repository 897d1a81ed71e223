"""Range-Doppler map, OS-CFAR, estimation, and the SIC loop."""

import numpy as np
import pytest
from dataclasses import replace

from ddsense.channel import ChannelRealization, PointTarget, add_awgn, apply_channel
from ddsense.exceptions import LengthMismatch
from ddsense.frames import FrameParams, critical_signal, idzt
from ddsense.sensing import (CfarConfig, calibrate_alpha, estimate_parameters,
                             lrt_statistic, os_cfar, range_doppler_map,
                             sic_detect, signed_doppler_bin, synthesize_echo)
from ddsense.waveforms import (PulseSpec, SymbolSource, matched_filter_rx,
                               modulate_otfs_zak)

RECT1 = PulseSpec(kind="rectangular", rolloff=0.0, oversampling=1)


def rd_map_oracle(rx, tx, params):
    """Direct triple-loop fast-time/slow-time evaluation."""
    m, n = params.M, params.N
    buf = np.zeros(m * n + m - 1, dtype=complex)
    take = min(buf.size, rx.size)
    buf[:take] = rx[:take]
    cells = np.zeros((m, n), dtype=complex)
    for l in range(m):
        z = np.zeros(n, dtype=complex)
        for nn in range(n):
            for i in range(m):
                z[nn] += buf[i + nn * m + l] * np.conj(tx[i + nn * m])
        for k in range(n):
            cells[l, k] = np.sum(z * np.exp(-2j * np.pi * np.arange(n) * k / n))
    return cells / np.sqrt(n)


def dd_frame(params, seed=0):
    grid = SymbolSource(kind="qpsk_random", seed=seed).dd_grid(params)
    return grid, idzt(grid)


class TestRangeDopplerMap:
    def test_on_grid_peak(self):
        params = FrameParams(8, 8)
        grid, chips = dd_frame(params, 1)
        tgt = PointTarget(1.0, 5 * params.delay_resolution,
                          3 * params.doppler_resolution)
        rx = apply_channel(modulate_otfs_zak(grid, RECT1),
                           ChannelRealization(targets=(tgt,)))
        rd = range_doppler_map(rx, chips)
        assert np.unravel_index(np.argmax(rd.power), rd.power.shape) == (5, 3)

    def test_zero_input_zero_map(self):
        params = FrameParams(8, 8)
        _, chips = dd_frame(params, 2)
        rx = critical_signal(np.zeros(64), params)
        assert np.all(range_doppler_map(rx, chips).cells == 0)

    def test_two_targets_match_oracle(self):
        params = FrameParams(8, 8)
        grid, chips = dd_frame(params, 3)
        ch = ChannelRealization(targets=(
            PointTarget(1.0, 2 * params.delay_resolution,
                        1 * params.doppler_resolution),
            PointTarget(0.4 * np.exp(0.9j), 6 * params.delay_resolution,
                        -2 * params.doppler_resolution)))
        rx = apply_channel(modulate_otfs_zak(grid, RECT1), ch)
        rd = range_doppler_map(rx, chips)
        oracle = rd_map_oracle(rx.samples, chips.samples, params)
        assert np.max(np.abs(rd.cells - oracle)) <= 1e-9

    def test_rejects_short_signals(self):
        params = FrameParams(8, 8)
        _, chips = dd_frame(params, 4)
        with pytest.raises(LengthMismatch):
            range_doppler_map(critical_signal(np.zeros(10), params), chips)


class TestOsCfar:
    def test_constant_map(self):
        cfg = CfarConfig(alpha=1.5)
        power = np.full((16, 16), 3.0)
        thr, dets = os_cfar(power, cfg)
        assert np.allclose(thr, 1.5 * 3.0)
        assert dets == []

    def test_single_spike_single_detection(self):
        cfg = CfarConfig(alpha=5.0)
        rng = np.random.default_rng(5)
        power = rng.uniform(0.9, 1.1, size=(16, 16))
        power[4, 7] = 1000.0  # 30 dB above the floor
        _, dets = os_cfar(power, cfg)
        assert len(dets) == 1
        assert dets[0][:2] == (4, 7)

    def test_scale_invariance(self):
        cfg = CfarConfig(alpha=4.0)
        rng = np.random.default_rng(6)
        power = rng.exponential(size=(16, 16))
        power[2, 3] = 50.0
        thr1, det1 = os_cfar(power, cfg)
        thr2, det2 = os_cfar(7.25 * power, cfg)
        assert np.array_equal(thr2, 7.25 * thr1)
        assert [(l, k) for l, k, _ in det1] == [(l, k) for l, k, _ in det2]

    def test_calibrated_pfa_on_exponential_noise(self):
        # synthetic exponential cells, calibrate then evaluate on 1e6 cells
        cfg = CfarConfig()
        rng = np.random.default_rng(7)
        cal = [rng.exponential(size=(16, 16)) for _ in range(2000)]
        alpha = calibrate_alpha(cal, cfg, target_pfa=1e-3)
        crossings = 0
        cells = 0
        for _ in range(4000):
            power = rng.exponential(size=(16, 16))
            thr, _ = os_cfar(power, replace(cfg, alpha=alpha))
            crossings += int(np.sum(power > thr))
            cells += power.size
        pfa = crossings / cells
        assert cells >= 10 ** 6
        assert 0.5e-3 <= pfa <= 2e-3

    def test_statistic_at_emission(self):
        cfg = CfarConfig(alpha=3.0)
        rng = np.random.default_rng(8)
        power = rng.exponential(size=(16, 16))
        power[5, 5] = 100.0
        _, dets = os_cfar(power, cfg)
        for _, _, stat in dets:
            assert stat >= cfg.alpha


class TestLrtStatistic:
    def test_unit_ratio(self):
        params = FrameParams(4, 4)
        cells = np.zeros((4, 4), dtype=complex)
        cells[1, 2] = 1.0
        from ddsense.sensing import RangeDopplerMap
        rd = RangeDopplerMap(params=params, cells=cells)
        assert lrt_statistic(rd, (1, 2), 1.0) == 1.0

    def test_quadratic_in_magnitude(self):
        params = FrameParams(4, 4)
        cells = np.zeros((4, 4), dtype=complex)
        cells[0, 0] = 2.0
        from ddsense.sensing import RangeDopplerMap
        rd = RangeDopplerMap(params=params, cells=cells)
        rd2 = RangeDopplerMap(params=params, cells=2.0 * cells)
        assert lrt_statistic(rd2, (0, 0), 1.0) == 4 * lrt_statistic(rd, (0, 0), 1.0)

    def test_ordering_matches_raw_power(self):
        params = FrameParams(4, 4)
        rng = np.random.default_rng(9)
        cells = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        from ddsense.sensing import RangeDopplerMap
        rd = RangeDopplerMap(params=params, cells=cells)
        stats = np.array([[lrt_statistic(rd, (l, k), 0.37) for k in range(4)]
                          for l in range(4)])
        assert np.array_equal(np.argsort(stats.ravel()),
                              np.argsort(rd.power.ravel()))


class TestEstimateParameters:
    def _noiseless_map(self, params, l0, k0, gain=1.0):
        grid, chips = dd_frame(params, 10)
        tgt = PointTarget(gain, l0 * params.delay_resolution,
                          k0 * params.doppler_resolution)
        rx = apply_channel(modulate_otfs_zak(grid, RECT1),
                           ChannelRealization(targets=(tgt,)))
        return range_doppler_map(rx, chips), chips, rx

    def test_on_grid_exact(self):
        params = FrameParams(16, 16)
        rd, _, _ = self._noiseless_map(params, 6, -4)  # wraps to map bin 12
        tau, nu, _ = estimate_parameters(rd, 6, 12)
        assert tau == pytest.approx(6 * params.delay_resolution, abs=1e-15)
        assert nu == pytest.approx(-4 * params.doppler_resolution, abs=1e-15)

    def test_off_grid_refinement_under_half_bin(self):
        params = FrameParams(16, 16)
        grid, chips = dd_frame(params, 11)
        pulse = PulseSpec(oversampling=4, span=16)
        tx = modulate_otfs_zak(grid, pulse)
        for frac in (0.2, 0.35, 0.5):
            tau_true = (5 + frac) * params.delay_resolution
            tgt = PointTarget(1.0, tau_true, 2 * params.doppler_resolution)
            rx = apply_channel(tx, ChannelRealization(targets=(tgt,)))
            rd = range_doppler_map(matched_filter_rx(rx, pulse), chips)
            l0, k0 = np.unravel_index(np.argmax(rd.power), rd.power.shape)
            tau, _, _ = estimate_parameters(rd, int(l0), int(k0), refine=True)
            err_bins = abs(tau - tau_true) / params.delay_resolution
            assert err_bins < 0.5

    def test_amplitude_least_squares(self):
        params = FrameParams(16, 16)
        h = 0.7 * np.exp(1j * np.pi / 4)
        rd, chips, rx = self._noiseless_map(params, 3, 2, gain=h)
        unit = synthesize_echo(chips, PointTarget(
            1.0, 3 * params.delay_resolution, 2 * params.doppler_resolution),
            RECT1)
        _, _, amp = estimate_parameters(rd, 3, 2, rx=rx, unit_echo=unit)
        assert amp == pytest.approx(h, abs=1e-6)


class TestSicDetect:
    def _setup(self, params, targets, snr_db, seed, pulse=RECT1,
               cfar=None, alpha=8.0):
        grid, chips = dd_frame(params, seed)
        tx = modulate_otfs_zak(grid, pulse)
        rx = apply_channel(tx, ChannelRealization(targets=tuple(targets)))
        rx_mf = matched_filter_rx(rx, pulse)
        rx_n = add_awgn(rx_mf, snr_db, seed + 1)
        cfg = cfar or CfarConfig(alpha=alpha)
        return rx_n, chips, cfg

    def test_noise_only_usually_empty(self):
        params = FrameParams(16, 16)
        _, chips = dd_frame(params, 12)
        rng = np.random.default_rng(13)
        cfg = CfarConfig(alpha=8.0)  # comfortably above the Pfa=1e-3 scale
        empties = 0
        for _ in range(50):
            noise = rng.standard_normal(2 * 271).view(np.complex128)
            rx = critical_signal(noise, params)
            if not sic_detect(rx, chips, cfg, max_targets=3):
                empties += 1
        assert empties >= 45

    def test_single_target_residual_drop(self):
        params = FrameParams(16, 16)
        tgt = PointTarget(0.9 * np.exp(0.4j), 4 * params.delay_resolution,
                          -3 * params.doppler_resolution)
        rx, chips, cfg = self._setup(params, [tgt], 40.0, 14)
        e0 = np.sum(np.abs(rx.samples) ** 2)
        dets = sic_detect(rx, chips, cfg, max_targets=3)
        assert len(dets) == 1
        assert (dets[0].delay_bin, dets[0].doppler_bin) == (4, 13)
        res = rx.samples.copy()
        echo = synthesize_echo(chips, PointTarget(
            dets[0].amplitude, dets[0].delay, dets[0].doppler), RECT1)
        take = min(res.size, echo.samples.size)
        res[:take] -= echo.samples[:take]
        drop_db = 10 * np.log10(e0 / np.sum(np.abs(res) ** 2))
        assert drop_db >= 20.0

    def test_masking_recovered_by_sic(self):
        params = FrameParams(16, 16)
        pulse = PulseSpec()
        cfar = CfarConfig(guard_cells=(2, 2), training_cells=(4, 4), alpha=5.1)
        strong = PointTarget(1.0, 5 * params.delay_resolution,
                             3 * params.doppler_resolution)
        weak = PointTarget(10 ** (-15 / 20), 7 * params.delay_resolution,
                           3 * params.doppler_resolution)
        rx, chips, cfg = self._setup(params, [strong, weak], 10.0, 15,
                                     pulse=pulse, cfar=cfar)
        rd = range_doppler_map(rx, chips)
        _, single = os_cfar(rd.power, cfg)
        assert not any((l, k) == (7, 3) for l, k, _ in single)
        dets = sic_detect(rx, chips, cfg, max_targets=4, pulse=pulse)
        bins = {(d.delay_bin, d.doppler_bin) for d in dets}
        assert (5, 3) in bins and (7, 3) in bins
        # strongest first
        assert (dets[0].delay_bin, dets[0].doppler_bin) == (5, 3)

    def test_halts_when_subtraction_fails(self, monkeypatch, caplog):
        import ddsense.sensing as sensing
        params = FrameParams(16, 16)
        tgt = PointTarget(1.0, 4 * params.delay_resolution, 0.0)
        rx, chips, cfg = self._setup(params, [tgt], 30.0, 16)

        def bogus_echo(tx_ref, target, pulse):
            return critical_signal(np.zeros(len(tx_ref)), tx_ref.frame_params)

        monkeypatch.setattr(sensing, "synthesize_echo", bogus_echo)
        with caplog.at_level("WARNING"):
            dets = sensing.sic_detect(rx, chips, cfg, max_targets=5)
        assert dets == []
        assert any("residual" in r.message for r in caplog.records)


def test_signed_doppler_bin():
    assert signed_doppler_bin(0, 16) == 0
    assert signed_doppler_bin(7, 16) == 7
    assert signed_doppler_bin(8, 16) == 8
    assert signed_doppler_bin(9, 16) == -7
    assert signed_doppler_bin(15, 16) == -1
