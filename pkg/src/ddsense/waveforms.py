"""Pulse shaping and the transmit/receive chains for both waveforms.

Three transmit paths share one shaping stage (upsample by Q, unit-energy
chip filter, linear convolution):

* ``modulate_otfs_zak``  -- IDZT of the DD grid, then shaping.
* ``modulate_otfs_sfft`` -- ISFFT + per-slot inverse DFT, then shaping.
* ``modulate_ofdm``      -- per-slot inverse DFT of a TF grid, then shaping.

With a rectangular pulse and Q=1 the two OTFS paths coincide sample for
sample; no cyclic prefix is used anywhere.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import upfirdn

from .exceptions import InvalidRolloff, LengthMismatch
from .frames import (DDGrid, FrameParams, TFGrid, TimeSignal, critical_signal,
                     idzt, isfft, slotwise_idft)

DEFAULT_OVERSAMPLING = 4
# 32 chips keeps the truncated-RRC cascade ISI under 1e-3 of the peak
DEFAULT_SPAN = 32


@dataclass(frozen=True)
class PulseSpec:
    """Chip-level pulse: rectangular or root raised cosine.

    ``span`` is the filter length in chip periods (rrc only) and
    ``oversampling`` the number of samples per chip.
    """

    kind: str = "rrc"
    rolloff: float = 0.3
    span: int = DEFAULT_SPAN
    oversampling: int = DEFAULT_OVERSAMPLING

    def __post_init__(self):
        if self.kind not in ("rectangular", "rrc"):
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        if self.kind == "rrc" and not 0.0 <= self.rolloff <= 1.0:
            raise InvalidRolloff(f"roll-off {self.rolloff} outside [0, 1]")
        if self.span < 2:
            raise ValueError("filter span must cover at least 2 chips")
        if self.oversampling < 1:
            raise ValueError("oversampling factor must be >= 1")

    @property
    def Q(self) -> int:
        return self.oversampling

    def taps(self) -> np.ndarray:
        if self.kind == "rectangular":
            return np.ones(self.Q) / np.sqrt(self.Q)
        return rrc_taps(self.rolloff, self.span, self.Q)

    @property
    def cascade_delay(self) -> int:
        """tx+rx filter cascade delay in samples at rate Q*B."""
        return len(self.taps()) - 1


def rectangular_pulse(oversampling: int = 1) -> PulseSpec:
    return PulseSpec(kind="rectangular", rolloff=0.0, oversampling=oversampling)


def rrc_taps(beta: float, span: int, q: int) -> np.ndarray:
    """Unit-energy root-raised-cosine taps of length ``span*q + 1``.

    Time is measured in chip periods; the singular points t=0 and
    t=+-1/(4 beta) use the analytic limits of the closed form.
    """
    if not 0.0 <= beta <= 1.0:
        raise InvalidRolloff(f"roll-off {beta} outside [0, 1]")
    if span < 2:
        raise ValueError("filter span must cover at least 2 chips")
    if q < 1:
        raise ValueError("oversampling factor must be >= 1")
    n = span * q + 1
    t = (np.arange(n) - (n - 1) / 2) / q
    if beta == 0.0:
        taps = np.sinc(t)
    else:
        taps = np.empty(n)
        at_zero = t == 0.0
        at_sing = np.isclose(np.abs(t), 1.0 / (4.0 * beta), rtol=0, atol=1e-12)
        regular = ~(at_zero | at_sing)
        tr = t[regular]
        num = (np.sin(np.pi * tr * (1.0 - beta))
               + 4.0 * beta * tr * np.cos(np.pi * tr * (1.0 + beta)))
        den = np.pi * tr * (1.0 - (4.0 * beta * tr) ** 2)
        taps[regular] = num / den
        taps[at_zero] = 1.0 - beta + 4.0 * beta / np.pi
        taps[at_sing] = (beta / np.sqrt(2.0)) * (
            (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * beta))
            + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * beta)))
    return taps / np.linalg.norm(taps)


def shape_chips(chips: TimeSignal, pulse: PulseSpec) -> TimeSignal:
    """Upsample a critically sampled sequence by Q and apply the tx filter.

    Linear convolution: output length is len(chips)*Q + span*Q for rrc
    (len(chips)*Q for rectangular), so delays past the frame edge stay
    physically meaningful.
    """
    params = chips.frame_params
    q = pulse.Q
    if pulse.kind == "rectangular" and q == 1:
        return chips
    shaped = upfirdn(pulse.taps(), chips.samples, up=q)
    return TimeSignal(samples=shaped, sample_rate=q * params.bandwidth,
                      oversampling=q, frame_params=params)


def modulate_otfs_zak(x: DDGrid, pulse: PulseSpec) -> TimeSignal:
    """Zak-path OTFS: IDZT then chip shaping."""
    return shape_chips(idzt(x), pulse)


def modulate_otfs_sfft(x: DDGrid, pulse: PulseSpec) -> TimeSignal:
    """SFFT-path OTFS: ISFFT, per-slot inverse DFT, then chip shaping."""
    return shape_chips(slotwise_idft(isfft(x)), pulse)


def modulate_ofdm(X: TFGrid, pulse: PulseSpec) -> TimeSignal:
    """OFDM/DMT baseline: per-slot inverse DFT then chip shaping."""
    return shape_chips(slotwise_idft(X), pulse)


def matched_filter_rx(r: TimeSignal, pulse: PulseSpec) -> TimeSignal:
    """Receive filter matched to the tx pulse, group-delay compensated and
    downsampled back to the chip rate (Q=1)."""
    params = r.frame_params
    q = pulse.Q
    if pulse.kind == "rectangular" and q == 1:
        return r
    if r.oversampling != q:
        raise LengthMismatch(
            f"signal oversampling {r.oversampling} != pulse oversampling {q}")
    min_len = params.M * params.N * q
    if len(r) < min_len:
        raise LengthMismatch(
            f"need at least {min_len} samples for one frame, got {len(r)}")
    taps = pulse.taps()
    filtered = np.convolve(r.samples, np.conj(taps[::-1]))
    # tx+rx cascade peaks at lag len(taps)-1 in full-convolution coordinates
    chips = filtered[len(taps) - 1::q]
    return critical_signal(chips, params)


QPSK_POINTS = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0)


@dataclass(frozen=True)
class SymbolSource:
    """Seeded symbol source; every grid it emits carries unit total energy
    so transmit power is identical across waveforms."""

    kind: str = "qpsk_random"
    seed: int = 0
    impulse_delay_bin: int = 0
    impulse_doppler_bin: int = 0
    fixed_symbols: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("qpsk_random", "single_impulse", "fixed"):
            raise ValueError(f"unknown symbol source kind {self.kind!r}")

    def _matrix(self, rows: int, cols: int, impulse_rc: tuple) -> np.ndarray:
        if self.kind == "qpsk_random":
            rng = np.random.default_rng(self.seed)
            idx = rng.integers(0, 4, size=(rows, cols))
            return QPSK_POINTS[idx] / np.sqrt(rows * cols)
        if self.kind == "single_impulse":
            grid = np.zeros((rows, cols), dtype=np.complex128)
            grid[impulse_rc] = 1.0
            return grid
        sym = np.asarray(self.fixed_symbols, dtype=np.complex128)
        if sym.shape != (rows, cols):
            raise ValueError(f"fixed grid has shape {sym.shape}, expected {(rows, cols)}")
        return sym / np.sqrt(np.sum(np.abs(sym) ** 2))

    def dd_grid(self, params: FrameParams) -> DDGrid:
        sym = self._matrix(params.M, params.N,
                           (self.impulse_delay_bin, self.impulse_doppler_bin))
        return DDGrid(params=params, symbols=sym)

    def tf_grid(self, params: FrameParams) -> TFGrid:
        sym = self._matrix(params.N, params.M,
                           (self.impulse_doppler_bin, self.impulse_delay_bin))
        return TFGrid(params=params, symbols=sym)
