"""Frame geometry and the transforms linking the DD, TF, and time domains.

Conventions used everywhere in this package:

* ``DDGrid.symbols[l, k]`` is the symbol at delay bin ``l`` and Doppler
  bin ``k`` (M x N, delay-major).
* ``TFGrid.symbols[n, m]`` is the symbol on time slot ``n`` and
  subcarrier ``m`` (N x M).
* Forward DD -> TF uses ``+nk/N`` and ``-ml/M`` exponents with a
  ``1/sqrt(NM)`` factor; the Zak pair uses ``1/sqrt(N)``.  All four
  transforms are unitary.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import LengthMismatch


@dataclass(frozen=True)
class FrameParams:
    """M x N delay-Doppler frame over a slot of duration T seconds."""

    num_delay_bins: int
    num_doppler_bins: int
    slot_duration: float = 1.0

    def __post_init__(self):
        if self.num_delay_bins < 1 or self.num_doppler_bins < 1:
            raise ValueError("grid dimensions must be >= 1")
        if not self.slot_duration > 0:
            raise ValueError("slot duration must be positive")

    @property
    def M(self) -> int:
        return self.num_delay_bins

    @property
    def N(self) -> int:
        return self.num_doppler_bins

    @property
    def T(self) -> float:
        return self.slot_duration

    @property
    def bandwidth(self) -> float:
        """Occupied bandwidth B = M/T in Hz."""
        return self.num_delay_bins / self.slot_duration

    @property
    def frame_duration(self) -> float:
        """Total frame duration T_f = N*T in seconds."""
        return self.num_doppler_bins * self.slot_duration

    @property
    def delay_resolution(self) -> float:
        """Delay bin width 1/B in seconds."""
        return self.slot_duration / self.num_delay_bins

    @property
    def doppler_resolution(self) -> float:
        """Doppler bin width 1/T_f in Hz."""
        return 1.0 / self.frame_duration


def _as_complex_matrix(symbols, shape):
    arr = np.asarray(symbols, dtype=np.complex128)
    if arr.shape != shape:
        raise ValueError(f"symbol matrix has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("symbol matrix contains non-finite entries")
    return arr


@dataclass(frozen=True)
class DDGrid:
    """Delay-Doppler symbol matrix, entry (l, k) = (delay bin, Doppler bin)."""

    params: FrameParams
    symbols: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _as_complex_matrix(self.symbols, (self.params.M, self.params.N))
        object.__setattr__(self, "symbols", arr)

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.symbols) ** 2))


@dataclass(frozen=True)
class TFGrid:
    """Time-frequency symbol matrix, entry (n, m) = (slot, subcarrier)."""

    params: FrameParams
    symbols: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _as_complex_matrix(self.symbols, (self.params.N, self.params.M))
        object.__setattr__(self, "symbols", arr)

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.symbols) ** 2))


@dataclass(frozen=True)
class TimeSignal:
    """Complex baseband samples at ``oversampling`` times the chip rate B."""

    samples: np.ndarray = field(repr=False)
    sample_rate: float
    oversampling: int
    frame_params: FrameParams

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.complex128)
        object.__setattr__(self, "samples", arr)
        if self.oversampling < 1:
            raise ValueError("oversampling factor must be >= 1")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def sample_period(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2))


def critical_signal(samples, params: FrameParams) -> TimeSignal:
    """Wrap critically sampled (Q=1) samples for the given frame."""
    return TimeSignal(samples=samples, sample_rate=params.bandwidth,
                      oversampling=1, frame_params=params)


def isfft(x: DDGrid) -> TFGrid:
    """Inverse SFFT: spread each DD symbol across the whole TF plane.

    X[n, m] = (1/sqrt(NM)) sum_{l,k} x[l,k] exp(j2pi(nk/N - ml/M)).
    """
    # inverse DFT over Doppler (k -> n), forward DFT over delay (l -> m)
    tmp = np.fft.ifft(x.symbols, axis=1, norm="ortho")
    tf = np.fft.fft(tmp, axis=0, norm="ortho").T
    return TFGrid(params=x.params, symbols=tf)


def sfft(X: TFGrid) -> DDGrid:
    """SFFT, the exact inverse of :func:`isfft`."""
    tmp = np.fft.ifft(X.symbols.T, axis=0, norm="ortho")
    dd = np.fft.fft(tmp, axis=1, norm="ortho")
    return DDGrid(params=X.params, symbols=dd)


def idzt(x: DDGrid) -> TimeSignal:
    """Inverse discrete Zak transform to a critically sampled frame.

    s[l + nM] = (1/sqrt(N)) sum_k x[l,k] exp(j2pi nk/N): an N-point
    inverse DFT per delay bin followed by a symbol-wise interleaver.
    """
    per_delay = np.fft.ifft(x.symbols, axis=1, norm="ortho")  # [l, n]
    samples = per_delay.T.reshape(-1)  # s[l + n*M]
    return critical_signal(samples, x.params)


def dzt(s: TimeSignal) -> DDGrid:
    """Discrete Zak transform of one critically sampled frame."""
    params = s.frame_params
    mn = params.M * params.N
    if len(s) != mn:
        raise LengthMismatch(f"expected {mn} samples, got {len(s)}")
    slots = s.samples.reshape(params.N, params.M)  # [n, l]
    dd = np.fft.fft(slots, axis=0, norm="ortho").T  # [l, k]
    return DDGrid(params=params, symbols=dd)


def slotwise_idft(X: TFGrid) -> TimeSignal:
    """Concatenated per-slot M-point inverse DFT (Heisenberg transform,
    rectangular pulse, no cyclic prefix)."""
    chips = np.fft.ifft(X.symbols, axis=1, norm="ortho").reshape(-1)
    return critical_signal(chips, X.params)


def slotwise_dft(s: TimeSignal) -> TFGrid:
    """Per-slot M-point DFT, the inverse of :func:`slotwise_idft`."""
    params = s.frame_params
    mn = params.M * params.N
    if len(s) != mn:
        raise LengthMismatch(f"expected {mn} samples, got {len(s)}")
    slots = s.samples.reshape(params.N, params.M)
    return TFGrid(params=params, symbols=np.fft.fft(slots, axis=1, norm="ortho"))
