"""Radar receive chain: range-Doppler map, OS-CFAR, grid estimation, SIC.

The range-Doppler map is the fast-time/slow-time structure: per-slot
correlation of the received sequence against the transmit reference at
every delay lag, then a unitary DFT along the slow-time (slot) axis.
This is the same computation as DD demodulation of the matched-filter
output, so the sensing and communication receivers share it.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .channel import ChannelRealization, PointTarget, apply_channel
from .exceptions import LengthMismatch
from .frames import FrameParams, TimeSignal, critical_signal
from .waveforms import PulseSpec, matched_filter_rx, shape_chips

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RangeDopplerMap:
    """Matched-filter output over the M x N delay-Doppler grid."""

    params: FrameParams
    cells: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.cells, dtype=np.complex128)
        if arr.shape != (self.params.M, self.params.N):
            raise ValueError(f"cell matrix has shape {arr.shape}, "
                             f"expected {(self.params.M, self.params.N)}")
        object.__setattr__(self, "cells", arr)

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.cells) ** 2


@dataclass(frozen=True)
class CfarConfig:
    """2-D OS-CFAR geometry and threshold scale.

    ``alpha`` may be set directly or calibrated for ``target_pfa`` with
    :func:`calibrate_alpha`; ``order_k`` defaults to 75% of the training
    window when left at 0.
    """

    guard_cells: tuple = (1, 1)
    training_cells: tuple = (4, 4)
    order_k: int = 0
    alpha: float = 1.0
    target_pfa: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "guard_cells", tuple(self.guard_cells))
        object.__setattr__(self, "training_cells", tuple(self.training_cells))
        if min(self.guard_cells) < 0 or min(self.training_cells) < 1:
            raise ValueError("guard cells must be >= 0 and training cells >= 1")
        if self.alpha <= 0:
            raise ValueError("threshold scale must be positive")
        if not 0.0 < self.target_pfa < 1.0:
            raise ValueError("target Pfa must lie in (0, 1)")
        if self.order_k == 0:
            object.__setattr__(self, "order_k",
                               int(np.ceil(0.75 * self.window_size)))
        if not 1 <= self.order_k <= self.window_size:
            raise ValueError(f"order statistic rank {self.order_k} outside "
                             f"[1, {self.window_size}]")

    @property
    def window_size(self) -> int:
        g_l, g_k = self.guard_cells
        t_l, t_k = self.training_cells
        return ((2 * (g_l + t_l) + 1) * (2 * (g_k + t_k) + 1)
                - (2 * g_l + 1) * (2 * g_k + 1))


@dataclass(frozen=True)
class Detection:
    """One accepted target hypothesis from the CFAR stage."""

    delay_bin: int
    doppler_bin: int
    delay: float
    doppler: float
    statistic: float
    amplitude: complex | None = None


def signed_doppler_bin(k: int, n: int) -> int:
    """Map a DFT bin index to the signed Doppler bin in (-N/2, N/2]."""
    return k - n if k > n // 2 else k


def range_doppler_map(rx: TimeSignal, tx_ref: TimeSignal) -> RangeDopplerMap:
    """Fast-time correlation at every delay lag, slow-time unitary DFT.

    cells[l, k] = (1/sqrt(N)) sum_n exp(-j2pi nk/N)
                  * sum_{i<M} rx[i + nM + l] conj(tx[i + nM])

    ``rx`` may extend past one frame to cover the channel delay spread;
    it is zero-padded to the MN + M - 1 samples the lag scan needs.
    """
    params = tx_ref.frame_params
    m, n = params.M, params.N
    mn = m * n
    if len(tx_ref) < mn:
        raise LengthMismatch(f"reference must hold one frame ({mn} samples)")
    if len(rx) < mn:
        raise LengthMismatch(f"received signal shorter than one frame ({mn})")
    needed = mn + m - 1
    rx_buf = np.zeros(needed, dtype=np.complex128)
    take = min(needed, len(rx))
    rx_buf[:take] = rx.samples[:take]
    tx_slots = np.conj(tx_ref.samples[:mn].reshape(n, m))
    z = np.empty((m, n), dtype=np.complex128)
    for lag in range(m):
        z[lag] = np.einsum("nm,nm->n", rx_buf[lag:lag + mn].reshape(n, m), tx_slots)
    cells = np.fft.fft(z, axis=1) / np.sqrt(n)
    return RangeDopplerMap(params=params, cells=cells)


def os_cfar(map_power: np.ndarray, cfg: CfarConfig, backend: str = "auto"):
    """OS-CFAR over a power map.

    Returns ``(threshold, detections)``: the per-cell adaptive threshold
    matrix, and the cells whose power exceeds it while being a local
    maximum within their guard region (peak grouping).  Bin indices are
    converted to delay/Doppler later by the caller, so detections here
    carry raw grid coordinates and the power-over-noise statistic.
    """
    power = np.asarray(map_power, dtype=np.float64)
    g_l, g_k = cfg.guard_cells
    t_l, t_k = cfg.training_cells
    thr, local_max = kernels.cfar_scan(power, g_l, g_k, t_l, t_k,
                                       cfg.order_k, cfg.alpha, backend=backend)
    hits = (power > thr) & (local_max == 1)
    detections = [(int(l), int(k), float(power[l, k] * cfg.alpha / thr[l, k]))
                  for l, k in zip(*np.nonzero(hits))]
    return thr, detections


def lrt_statistic(rd_map: RangeDopplerMap, cell: tuple, noise_floor: float) -> float:
    """Likelihood-ratio sufficient statistic: cell power over the noise
    floor (monotone in the matched-filter magnitude)."""
    l, k = cell
    return float(np.abs(rd_map.cells[l, k]) ** 2 / noise_floor)


def _parabolic_offset(db_m1: float, db_0: float, db_p1: float) -> float:
    denom = db_m1 - 2.0 * db_0 + db_p1
    if denom >= 0.0:  # not a concave peak, keep the grid value
        return 0.0
    delta = 0.5 * (db_m1 - db_p1) / denom
    return float(np.clip(delta, -0.5, 0.5))


def estimate_parameters(rd_map: RangeDopplerMap, delay_bin: int, doppler_bin: int,
                        rx: TimeSignal | None = None,
                        unit_echo: TimeSignal | None = None,
                        refine: bool = False):
    """Grid estimate (tau, nu, h) for a detected cell.

    The delay/Doppler come straight from the bin indices; with
    ``refine`` a 3-point parabolic fit on log magnitude shifts each by a
    sub-bin offset (neighbours wrap, matching the map's circular
    topology).  The amplitude is the least-squares projection
    <rx, echo>/||echo||^2 and needs the unit-gain echo of the estimated
    target; it is None when either signal is omitted.
    """
    params = rd_map.params
    m, n = params.M, params.N
    l_hat = float(delay_bin)
    k_hat = float(signed_doppler_bin(doppler_bin, n))
    if refine:
        logmag = np.log(np.abs(rd_map.cells) + 1e-300)
        l0, k0 = delay_bin, doppler_bin
        l_hat += _parabolic_offset(logmag[(l0 - 1) % m, k0], logmag[l0, k0],
                                   logmag[(l0 + 1) % m, k0])
        k_hat += _parabolic_offset(logmag[l0, (k0 - 1) % n], logmag[l0, k0],
                                   logmag[l0, (k0 + 1) % n])
    tau = (l_hat % m) * params.delay_resolution
    nu = k_hat * params.doppler_resolution
    amplitude = None
    if rx is not None and unit_echo is not None:
        e = unit_echo.samples
        r = rx.samples[:e.size]
        if r.size < e.size:
            r = np.concatenate([r, np.zeros(e.size - r.size, np.complex128)])
        denom = float(np.real(np.vdot(e, e)))
        amplitude = complex(np.vdot(e, r) / denom) if denom > 0 else 0j
    return tau, nu, amplitude


def synthesize_echo(tx_ref: TimeSignal, target: PointTarget,
                    pulse: PulseSpec) -> TimeSignal:
    """Matched-filter-domain echo of one target for the given chip
    reference: shape, pass through the channel, receive-filter back to
    the chip rate.  Mirrors the forward simulation path exactly."""
    shaped = shape_chips(tx_ref, pulse)
    echoed = apply_channel(shaped, ChannelRealization(targets=(target,)))
    return matched_filter_rx(echoed, pulse)


def sic_detect(rx: TimeSignal, tx_ref: TimeSignal, cfg: CfarConfig,
               max_targets: int, pulse: PulseSpec | None = None,
               refine: bool = False) -> list:
    """Successive interference cancellation detection loop.

    Repeatedly: map the residual, run OS-CFAR, take the strongest
    detection, estimate its parameters and amplitude, subtract its
    reconstructed echo, and continue until nothing is detected,
    ``max_targets`` is reached, or a subtraction fails to reduce the
    residual energy (logged, loop halts).
    """
    if max_targets < 1:
        raise ValueError("max_targets must be >= 1")
    if pulse is None:
        pulse = PulseSpec(kind="rectangular", rolloff=0.0, oversampling=1)
    params = tx_ref.frame_params
    residual = rx.samples.copy()
    found: list[Detection] = []
    for _ in range(max_targets):
        rd = range_doppler_map(critical_signal(residual, params), tx_ref)
        _, hits = os_cfar(rd.power, cfg)
        if not hits:
            break
        l, k, stat = max(hits, key=lambda h: rd.power[h[0], h[1]])
        tau, nu, _ = estimate_parameters(rd, l, k, refine=refine)
        unit_echo = synthesize_echo(tx_ref, PointTarget(1.0, tau, nu), pulse)
        tau, nu, amp = estimate_parameters(
            rd, l, k, rx=critical_signal(residual, params),
            unit_echo=unit_echo, refine=refine)
        echo = amp * unit_echo.samples
        new_residual = residual.copy()
        take = min(new_residual.size, echo.size)
        new_residual[:take] -= echo[:take]
        if np.sum(np.abs(new_residual) ** 2) >= np.sum(np.abs(residual) ** 2):
            logger.warning("SIC subtraction did not reduce residual energy; "
                           "stopping after %d targets", len(found))
            break
        residual = new_residual
        found.append(Detection(delay_bin=l, doppler_bin=k, delay=tau,
                               doppler=nu, statistic=stat, amplitude=amp))
    return found


def calibrate_alpha(noise_maps, cfg: CfarConfig, target_pfa: float | None = None,
                    backend: str = "auto") -> float:
    """Threshold scale hitting ``target_pfa`` on noise-only maps.

    Pools the per-cell ratio of power to its OS noise estimate over all
    provided maps and returns the (1 - Pfa) quantile, so that
    P(power > alpha * OS) matches the target on noise-only input.
    """
    if target_pfa is None:
        target_pfa = cfg.target_pfa
    unit = replace(cfg, alpha=1.0)
    g_l, g_k = unit.guard_cells
    t_l, t_k = unit.training_cells
    ratios = []
    for power in noise_maps:
        power = np.asarray(power, dtype=np.float64)
        noise, _ = kernels.cfar_scan(power, g_l, g_k, t_l, t_k,
                                     unit.order_k, 1.0, backend=backend)
        ratios.append((power / noise).ravel())
    pooled = np.concatenate(ratios)
    return float(np.quantile(pooled, 1.0 - target_pfa))
