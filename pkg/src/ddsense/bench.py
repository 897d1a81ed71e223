"""Seeded Monte-Carlo experiments and their CSV artifacts.

Every output is a pure function of (config, master seed): per-trial
generators are derived from the master seed and the trial index, trials
aggregate in index order, and floats are written with fixed formatting,
so reruns are byte-identical regardless of the worker count.
"""

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from numpy.random import SeedSequence, default_rng

from .channel import ChannelRealization, PointTarget, add_awgn, apply_channel
from .config import ExperimentConfig
from .ambiguity import cross_ambiguity, zero_delay_cut, zero_doppler_cut
from .frames import TimeSignal, critical_signal, idzt, slotwise_idft
from .sensing import (calibrate_alpha, estimate_parameters, os_cfar,
                      range_doppler_map, signed_doppler_bin)
from .waveforms import (SymbolSource, matched_filter_rx, modulate_ofdm,
                        modulate_otfs_zak, shape_chips)

# seed-stream tags keeping the independent random inputs separated
_TARGET_STREAM = 1
_SYMBOL_STREAM = 2
_NOISE_STREAM = 3
_CAL_STREAM = 4
_SCENE_STREAM = 5

_WF_ID = {"dd": 0, "tf": 1}

_alpha_cache: dict = {}


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one Monte-Carlo trial."""

    trial: int
    true_delay: float
    true_doppler: float
    true_gain: complex
    detected: bool
    hit: bool
    delay_err_bins: float
    doppler_err_bins: float


def circular_diff(a: float, b: float, period: float) -> float:
    """Signed difference a - b wrapped into (-period/2, period/2]."""
    d = (a - b) % period
    return d - period if d > period / 2 else d


def wilson_interval(hits: int, n: int, z: float = 1.959963984540054):
    """95% Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    p = hits / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1.0 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _fmt(x) -> str:
    return f"{x:.12g}"


def _write_csv(path, header, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _tx_frames(waveform: str, cfg: ExperimentConfig, seed):
    """(chip reference, shaped transmit signal) for one trial."""
    src = SymbolSource(kind="qpsk_random", seed=seed)
    if waveform == "dd":
        grid = src.dd_grid(cfg.frame)
        chips = idzt(grid)
        return chips, modulate_otfs_zak(grid, cfg.pulse)
    grid = src.tf_grid(cfg.frame)
    chips = slotwise_idft(grid)
    return chips, modulate_ofdm(grid, cfg.pulse)


def _draw_target(cfg: ExperimentConfig, rng) -> PointTarget:
    params = cfg.frame
    phase = rng.uniform(0.0, 2.0 * np.pi)
    if cfg.target_kind == "on_grid_random_bin":
        l0 = int(rng.integers(0, params.M))
        k0 = int(rng.integers(-(params.N // 2 - 1), params.N // 2))
        tau = l0 * params.delay_resolution
        nu = k0 * params.doppler_resolution
    else:
        tau = rng.uniform(0.0, params.slot_duration * (params.M - 1) / params.M)
        nu = rng.uniform(-0.5 / params.slot_duration, 0.5 / params.slot_duration)
    return PointTarget(gain=np.exp(1j * phase), delay=tau, doppler=nu)


def _seed_entropy(seed) -> int:
    # squash an arbitrary integer seed into SeedSequence-friendly range
    return int(seed) & 0xFFFFFFFFFFFFFFFF


def noise_only_map(cfg: ExperimentConfig, waveform: str, index: int) -> np.ndarray:
    """RD power map of pure receiver noise against a fresh QPSK reference."""
    params = cfg.frame
    wf = _WF_ID[waveform]
    master = _seed_entropy(cfg.master_seed)
    chips, _ = _tx_frames(waveform, cfg,
                          SeedSequence((master, wf, _CAL_STREAM, index, 0)))
    rng = default_rng(SeedSequence((master, wf, _CAL_STREAM, index, 1)))
    n = params.M * params.N + params.M - 1
    noise = rng.standard_normal(2 * n).view(np.complex128) / np.sqrt(2.0)
    rd = range_doppler_map(critical_signal(noise, params), chips)
    return rd.power


def calibrated_alpha(cfg: ExperimentConfig, waveform: str) -> float:
    """OS-CFAR scale for the configured target Pfa, memoized per setup."""
    key = (waveform, _seed_entropy(cfg.master_seed), cfg.num_delay_bins,
           cfg.num_doppler_bins, cfg.cfar.guard_cells, cfg.cfar.training_cells,
           cfg.cfar.order_k, cfg.cfar.target_pfa, cfg.calibration_maps)
    if key not in _alpha_cache:
        maps = (noise_only_map(cfg, waveform, i)
                for i in range(cfg.calibration_maps))
        _alpha_cache[key] = calibrate_alpha(maps, cfg.cfar)
    return _alpha_cache[key]


def run_single_trial(cfg: ExperimentConfig, waveform: str, snr_db: float,
                     snr_index: int, trial: int, alpha: float) -> TrialRecord:
    """One target draw through the full transmit/channel/receive chain."""
    params = cfg.frame
    wf = _WF_ID[waveform]
    master = _seed_entropy(cfg.master_seed)
    target_rng = default_rng(SeedSequence((master, _TARGET_STREAM, trial)))
    target = _draw_target(cfg, target_rng)
    chips, shaped = _tx_frames(
        waveform, cfg, SeedSequence((master, wf, _SYMBOL_STREAM, trial)))
    rx = apply_channel(shaped, ChannelRealization(targets=(target,)))
    rx_mf = matched_filter_rx(rx, cfg.pulse)
    rx_n = add_awgn(rx_mf, snr_db,
                    SeedSequence((master, wf, _NOISE_STREAM, snr_index, trial)))
    rd = range_doppler_map(rx_n, chips)
    _, hits = os_cfar(rd.power, replace(cfg.cfar, alpha=alpha))

    true_l = target.delay * params.bandwidth
    true_k = target.doppler * params.frame_duration
    if hits:
        l_hat, k_hat, _ = max(hits, key=lambda h: rd.power[h[0], h[1]])
        detected = True
    else:
        # CFAR miss: fall back to the strongest matched-filter response
        l_hat, k_hat = np.unravel_index(np.argmax(rd.power), rd.power.shape)
        detected = False
    if cfg.refine:
        tau_hat, nu_hat, _ = estimate_parameters(rd, int(l_hat), int(k_hat),
                                                 refine=True)
        l_est = tau_hat * params.bandwidth
        k_est = nu_hat * params.frame_duration
    else:
        l_est = float(l_hat)
        k_est = float(signed_doppler_bin(int(k_hat), params.N))
    hit = detected and any(
        abs(circular_diff(l, true_l, params.M)) <= 1.0
        and abs(circular_diff(signed_doppler_bin(k, params.N), true_k,
                              params.N)) <= 1.0
        for l, k, _ in hits)
    return TrialRecord(
        trial=trial,
        true_delay=target.delay,
        true_doppler=target.doppler,
        true_gain=complex(target.gain),
        detected=detected,
        hit=hit,
        delay_err_bins=circular_diff(l_est, true_l, params.M),
        doppler_err_bins=circular_diff(k_est, true_k, params.N),
    )


def _trials_for_point(cfg: ExperimentConfig, waveform: str, snr_db: float,
                      snr_index: int, alpha: float) -> list:
    if cfg.workers <= 1:
        return [run_single_trial(cfg, waveform, snr_db, snr_index, t, alpha)
                for t in range(cfg.trials)]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        futures = [pool.submit(run_single_trial, cfg, waveform, snr_db,
                               snr_index, t, alpha)
                   for t in range(cfg.trials)]
        return [f.result() for f in futures]  # index order, not finish order


def detection_curve(cfg: ExperimentConfig, waveform: str) -> list:
    """(snr_db, trials, hits, pd, lo, hi) per SNR grid point."""
    alpha = calibrated_alpha(cfg, waveform)
    rows = []
    for idx, snr_db in enumerate(cfg.snr_grid_db):
        records = _trials_for_point(cfg, waveform, snr_db, idx, alpha)
        hits = sum(r.hit for r in records)
        lo, hi = wilson_interval(hits, cfg.trials)
        rows.append((snr_db, cfg.trials, hits, hits / cfg.trials, lo, hi))
    return rows


def mse_curve(cfg: ExperimentConfig, waveform: str) -> list:
    """(snr_db, trials, mse_delay_bins2, mse_doppler_bins2, ...) rows."""
    params = cfg.frame
    alpha = calibrated_alpha(cfg, waveform)
    rows = []
    for idx, snr_db in enumerate(cfg.snr_grid_db):
        records = _trials_for_point(cfg, waveform, snr_db, idx, alpha)
        d2 = sum(r.delay_err_bins ** 2 for r in records) / cfg.trials
        k2 = sum(r.doppler_err_bins ** 2 for r in records) / cfg.trials
        rows.append((snr_db, cfg.trials, d2, k2,
                     d2 * params.delay_resolution ** 2,
                     k2 * params.doppler_resolution ** 2))
    return rows


def run_detection(cfg: ExperimentConfig, out_dir: str | None = None) -> list:
    out = cfg.resolved_output_dir(out_dir)
    rows = []
    for waveform in cfg.waveforms:
        for snr_db, n, hits, pd, lo, hi in detection_curve(cfg, waveform):
            rows.append((waveform, _fmt(snr_db), n, hits, _fmt(pd),
                         _fmt(lo), _fmt(hi)))
    path = _write_csv(os.path.join(out, "pd_vs_snr.csv"),
                      ("waveform", "snr_db", "trials", "hits", "pd",
                       "pd_wilson_lo", "pd_wilson_hi"), rows)
    return [path]


def run_mse(cfg: ExperimentConfig, out_dir: str | None = None) -> list:
    out = cfg.resolved_output_dir(out_dir)
    rows = []
    for waveform in cfg.waveforms:
        for snr_db, n, d2, k2, ds2, khz2 in mse_curve(cfg, waveform):
            rows.append((waveform, _fmt(snr_db), n, _fmt(d2), _fmt(k2),
                         _fmt(ds2), _fmt(khz2)))
    path = _write_csv(os.path.join(out, "mse_vs_snr.csv"),
                      ("waveform", "snr_db", "trials", "mse_delay_bins2",
                       "mse_doppler_bins2", "mse_delay_s2", "mse_doppler_hz2"),
                      rows)
    return [path]


def ambiguity_signal(cfg: ExperimentConfig, waveform: str, seed=None) -> TimeSignal:
    """Transmit signal for the ambiguity cuts: a single-impulse DD frame
    for the DD waveform, a seeded QPSK TF frame for the baseline."""
    master = _seed_entropy(cfg.master_seed) if seed is None else seed
    if waveform == "dd":
        src = SymbolSource(kind="single_impulse")
        return modulate_otfs_zak(src.dd_grid(cfg.frame), cfg.pulse)
    src = SymbolSource(kind="qpsk_random", seed=master)
    return modulate_ofdm(src.tf_grid(cfg.frame), cfg.pulse)


def ambiguity_axes(cfg: ExperimentConfig):
    """Delay axis (+-2T at one-sample steps) and Doppler axis (+-2/T at
    quarter-Doppler-bin steps) for the cut reproduction."""
    params = cfg.frame
    fs = cfg.pulse.Q * params.bandwidth
    t_slot = params.slot_duration
    n_d = int(round(2 * t_slot * fs))
    delay_axis = np.arange(-n_d, n_d + 1) / fs
    step = params.doppler_resolution / 4.0
    n_v = int(round(2.0 / t_slot / step))
    doppler_axis = np.arange(-n_v, n_v + 1) * step
    return delay_axis, doppler_axis


def ambiguity_cuts(cfg: ExperimentConfig, waveform: str, seed=None):
    """(delay cut, doppler cut) as (axis, magnitude_db) pairs."""
    sig = ambiguity_signal(cfg, waveform, seed)
    delay_axis, doppler_axis = ambiguity_axes(cfg)
    zd = cross_ambiguity(sig, sig, delay_axis, np.array([0.0]))
    zv = cross_ambiguity(sig, sig, np.array([0.0]), doppler_axis)
    return zero_doppler_cut(zd), zero_delay_cut(zv)


def run_ambiguity(cfg: ExperimentConfig, out_dir: str | None = None) -> list:
    out = cfg.resolved_output_dir(out_dir)
    paths = []
    for waveform in cfg.waveforms:
        (d_axis, d_db), (v_axis, v_db) = ambiguity_cuts(cfg, waveform)
        paths.append(_write_csv(
            os.path.join(out, f"ambiguity_{waveform}_zero_doppler.csv"),
            ("waveform", "axis_kind", "normalized_value", "magnitude_db"),
            [(waveform, "delay", _fmt(x), _fmt(y))
             for x, y in zip(d_axis, d_db)]))
        paths.append(_write_csv(
            os.path.join(out, f"ambiguity_{waveform}_zero_delay.csv"),
            ("waveform", "axis_kind", "normalized_value", "magnitude_db"),
            [(waveform, "doppler", _fmt(x), _fmt(y))
             for x, y in zip(v_axis, v_db)]))
    return paths


def demo_scene(cfg: ExperimentConfig) -> list:
    """Well-separated on-grid targets with descending gains."""
    params = cfg.frame
    rng = default_rng(SeedSequence((_seed_entropy(cfg.master_seed),
                                    _SCENE_STREAM)))
    targets = []
    taken = []
    while len(targets) < cfg.target_count:
        l0 = int(rng.integers(0, params.M))
        k0 = int(rng.integers(-(params.N // 2 - 1), params.N // 2))
        if any(abs(circular_diff(l0, l, params.M)) < 4
               or abs(circular_diff(k0, k, params.N)) < 4 for l, k in taken):
            continue
        taken.append((l0, k0))
        gain = 10.0 ** (-3.0 * len(targets) / 20.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        targets.append(PointTarget(gain=gain, delay=l0 * params.delay_resolution,
                                   doppler=k0 * params.doppler_resolution))
    return targets


def run_rdmap_demo(cfg: ExperimentConfig, out_dir: str | None = None,
                   snr_db: float = 15.0) -> list:
    out = cfg.resolved_output_dir(out_dir)
    params = cfg.frame
    waveform = cfg.waveforms[0]
    master = _seed_entropy(cfg.master_seed)
    alpha = calibrated_alpha(cfg, waveform)
    targets = demo_scene(cfg)
    chips, shaped = _tx_frames(waveform, cfg,
                               SeedSequence((master, _SCENE_STREAM, 1)))
    rx = apply_channel(shaped, ChannelRealization(targets=tuple(targets)))
    rx_mf = matched_filter_rx(rx, cfg.pulse)
    rx_n = add_awgn(rx_mf, snr_db, SeedSequence((master, _SCENE_STREAM, 2)))
    rd = range_doppler_map(rx_n, chips)
    thr, hits = os_cfar(rd.power, replace(cfg.cfar, alpha=alpha))

    peak = float(np.max(rd.power))
    with np.errstate(divide="ignore"):
        map_db = np.maximum(10.0 * np.log10(rd.power / peak), -80.0)
        thr_db = np.maximum(10.0 * np.log10(thr / peak), -80.0)
    map_rows, thr_rows = [], []
    for l in range(params.M):
        for k in range(params.N):
            map_rows.append((l, k, _fmt(map_db[l, k])))
            thr_rows.append((l, k, _fmt(thr_db[l, k])))
    det_rows = []
    for l, k, stat in sorted(hits, key=lambda h: -h[2]):
        tau, nu, _ = estimate_parameters(rd, l, k, refine=cfg.refine)
        det_rows.append((l, k, _fmt(tau), _fmt(nu), _fmt(stat)))
    header = ("delay_bin", "doppler_bin", "power_db")
    return [
        _write_csv(os.path.join(out, "rdmap_map.csv"), header, map_rows),
        _write_csv(os.path.join(out, "rdmap_threshold.csv"), header, thr_rows),
        _write_csv(os.path.join(out, "rdmap_detections.csv"),
                   ("delay_bin", "doppler_bin", "delay", "doppler",
                    "statistic"), det_rows),
    ]
