"""Fast invariant checks behind the ``selftest`` CLI subcommand.

Each check returns (name, passed, detail); the CLI exits nonzero when
any fails.  These overlap deliberately with the pytest suite so a
deployed install can be probed without the test tree.
"""

import numpy as np

from . import kernels
from .channel import ChannelRealization, PointTarget, apply_channel
from .frames import (DDGrid, FrameParams, critical_signal, dzt, idzt, isfft,
                     sfft, slotwise_idft)
from .sensing import range_doppler_map
from .waveforms import (PulseSpec, SymbolSource, matched_filter_rx,
                        modulate_otfs_sfft, modulate_otfs_zak)


def _random_grid(params, rng):
    sym = rng.standard_normal((params.M, params.N)) \
        + 1j * rng.standard_normal((params.M, params.N))
    return DDGrid(params=params, symbols=sym)


def check_transform_roundtrips():
    rng = np.random.default_rng(1)
    worst = 0.0
    for m in (2, 4, 8, 16, 32):
        for n in (2, 4, 8, 16, 32):
            x = _random_grid(FrameParams(m, n), rng)
            r1 = np.max(np.abs(sfft(isfft(x)).symbols - x.symbols))
            r2 = np.max(np.abs(dzt(idzt(x)).symbols - x.symbols))
            e1 = abs(isfft(x).energy - x.energy) / x.energy
            e2 = abs(idzt(x).energy - x.energy) / x.energy
            worst = max(worst, r1, r2, e1, e2)
    return worst < 1e-10, f"worst deviation {worst:.3e}"


def check_path_equivalence():
    rng = np.random.default_rng(2)
    pulse = PulseSpec(kind="rectangular", rolloff=0.0, oversampling=1)
    worst = 0.0
    for m, n in ((2, 2), (4, 8), (16, 16)):
        x = _random_grid(FrameParams(m, n), rng)
        a = modulate_otfs_zak(x, pulse).samples
        b = modulate_otfs_sfft(x, pulse).samples
        worst = max(worst, float(np.max(np.abs(a - b))))
    return worst < 1e-10, f"max sample deviation {worst:.3e}"


def check_pulsone_structure():
    params = FrameParams(16, 8)
    src = SymbolSource(kind="single_impulse", impulse_delay_bin=3,
                       impulse_doppler_bin=2)
    s = idzt(src.dd_grid(params)).samples
    nz = np.flatnonzero(np.abs(s) > 1e-12)
    ok = np.array_equal(nz % params.M, np.full(params.N, 3)) and nz.size == params.N
    return ok, f"{nz.size} pulses at residues {sorted(set(nz % params.M))}"


def check_channel_superposition():
    params = FrameParams(8, 8)
    rng = np.random.default_rng(3)
    s = critical_signal(rng.standard_normal(64) + 1j * rng.standard_normal(64),
                        params)
    t1 = PointTarget(0.8 + 0.1j, 2 * params.delay_resolution, 0.21)
    t2 = PointTarget(-0.3 + 0.4j, 5.37 * params.delay_resolution, -0.4)
    both = apply_channel(s, ChannelRealization(targets=(t1, t2))).samples
    sep = np.zeros_like(both)
    for tgt in (t1, t2):
        one = apply_channel(s, ChannelRealization(targets=(tgt,))).samples
        sep[:one.size] += one
    dev = float(np.max(np.abs(both - sep)))
    return dev < 1e-12, f"superposition deviation {dev:.3e}"


def check_cfar_rank():
    rng = np.random.default_rng(4)
    power = rng.exponential(size=(16, 16))
    thr, _ = kernels.cfar_scan(power, 1, 1, 3, 3, 20, 1.0, backend="numpy")
    offs = [(dl, dk) for dl in range(-4, 5) for dk in range(-4, 5)
            if abs(dl) > 1 or abs(dk) > 1]
    ok = True
    for l in range(16):
        for k in range(16):
            window = sorted(power[(l + dl) % 16, (k + dk) % 16]
                            for dl, dk in offs)
            if window[19] != thr[l, k]:
                ok = False
    if kernels.HAVE_COMPILED:
        thr_c, _ = kernels.cfar_scan(power, 1, 1, 3, 3, 20, 1.0,
                                     backend="compiled")
        ok = ok and np.array_equal(thr, thr_c)
    return ok, "order statistic matches brute-force sort"


def check_rdmap_peak():
    params = FrameParams(8, 8)
    pulse = PulseSpec(kind="rectangular", rolloff=0.0, oversampling=1)
    src = SymbolSource(kind="qpsk_random", seed=7)
    grid = src.dd_grid(params)
    chips = idzt(grid)
    tgt = PointTarget(1.0, 3 * params.delay_resolution,
                      2 * params.doppler_resolution)
    rx = apply_channel(modulate_otfs_zak(grid, pulse),
                       ChannelRealization(targets=(tgt,)))
    rd = range_doppler_map(matched_filter_rx(rx, pulse), chips)
    peak = np.unravel_index(np.argmax(rd.power), rd.power.shape)
    return peak == (3, 2), f"peak at {peak}, expected (3, 2)"


CHECKS = (
    ("transform round-trips", check_transform_roundtrips),
    ("sfft/zak path equivalence", check_path_equivalence),
    ("pulsone comb structure", check_pulsone_structure),
    ("channel superposition", check_channel_superposition),
    ("os-cfar order statistic", check_cfar_rank),
    ("range-doppler peak", check_rdmap_peak),
)


def run_selftest(verbose: bool = True) -> bool:
    all_ok = True
    for name, fn in CHECKS:
        ok, detail = fn()
        all_ok &= ok
        if verbose:
            print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return all_ok
