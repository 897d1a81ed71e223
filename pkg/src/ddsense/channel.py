"""Point-scatterer delay-Doppler channel and calibrated AWGN.

The channel operator is applied implicitly, never as a matrix: each
scatterer delays the signal (exact sample shift when the delay lands on
the sample grid, otherwise a band-limited frequency-domain phase ramp on
a zero-padded buffer) and modulates it with a continuous-time Doppler
phase ramp, so off-grid draws are exact.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import fft, ifft, next_fast_len

from .exceptions import DelayOutOfRange, DopplerOutOfRange
from .frames import TimeSignal

_INTEGER_SHIFT_TOL = 1e-9


@dataclass(frozen=True)
class PointTarget:
    """Single scatterer: complex gain, delay in seconds, Doppler in Hz."""

    gain: complex = 1.0 + 0.0j
    delay: float = 0.0
    doppler: float = 0.0


@dataclass(frozen=True)
class ChannelRealization:
    """Targets frozen for the duration of one frame, plus the noise
    variance the receiving chain should apply for the requested SNR."""

    targets: tuple = field(default_factory=tuple)
    noise_variance: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.noise_variance < 0:
            raise ValueError("noise variance must be >= 0")


def delay_samples(samples: np.ndarray, shift: float, pad_to: int | None = None) -> np.ndarray:
    """Delay a sample sequence by ``shift`` samples (may be fractional).

    Integer shifts are exact; fractional shifts use an FFT phase ramp on
    a buffer zero-padded to at least twice the occupied length so the
    wrap-around of the circular shift never reaches the output window.
    Output length is ``pad_to`` if given, else the input length.
    """
    n = samples.size
    out_len = pad_to if pad_to is not None else n
    if shift == 0 and out_len == n:
        return samples.copy()
    rounded = round(shift)
    if abs(shift - rounded) < _INTEGER_SHIFT_TOL:
        out = np.zeros(out_len, dtype=np.complex128)
        if rounded >= 0:
            take = min(n, out_len - rounded)
            if take > 0:
                out[rounded:rounded + take] = samples[:take]
        else:
            take = min(n + rounded, out_len)
            if take > 0:
                out[:take] = samples[-rounded:-rounded + take]
        return out
    span = max(n, out_len) + int(np.ceil(abs(shift))) + 1
    nfft = next_fast_len(max(2 * n, span))
    spec = fft(samples, nfft)
    freqs = np.fft.fftfreq(nfft)
    shifted = ifft(spec * np.exp(-2j * np.pi * freqs * shift), nfft)
    out = np.zeros(out_len, dtype=np.complex128)
    take = min(out_len, nfft)
    out[:take] = shifted[:take]
    return out


def apply_channel(s: TimeSignal, ch: ChannelRealization) -> TimeSignal:
    """Superpose every target's delayed, Doppler-shifted copy of ``s``.

    r[i] = sum_p h_p * s(i*Ts - tau_p) * exp(j2pi nu_p (i*Ts - tau_p))

    The output buffer is extended to hold the largest delay.
    """
    params = s.frame_params
    fs = s.sample_rate
    t_slot = params.slot_duration
    for tgt in ch.targets:
        if not 0.0 <= tgt.delay < t_slot:
            raise DelayOutOfRange(
                f"delay {tgt.delay} outside [0, {t_slot})")
        # Nyquist edge included: the +-1/(2T) Doppler wrap bins coincide
        if not abs(tgt.doppler) <= 0.5 / t_slot:
            raise DopplerOutOfRange(
                f"Doppler {tgt.doppler} outside (+-{0.5 / t_slot})")
    max_shift = max((tgt.delay * fs for tgt in ch.targets), default=0.0)
    out_len = s.samples.size + int(np.ceil(max_shift))
    out = np.zeros(out_len, dtype=np.complex128)
    t = np.arange(out_len) / fs
    for tgt in ch.targets:
        delayed = delay_samples(s.samples, tgt.delay * fs, pad_to=out_len)
        out += tgt.gain * delayed * np.exp(2j * np.pi * tgt.doppler * (t - tgt.delay))
    return TimeSignal(samples=out, sample_rate=fs,
                      oversampling=s.oversampling, frame_params=params)


def add_awgn(s: TimeSignal, snr_db: float, seed) -> TimeSignal:
    """Add circularly symmetric complex Gaussian noise.

    The noise variance is sigma^2 = P_sig / 10^(snr_db/10) with P_sig the
    mean per-sample signal power over the buffer.  ``snr_db=inf`` returns
    the input unchanged; identical seeds give identical noise.
    """
    if np.isinf(snr_db):
        return s
    p_sig = float(np.mean(np.abs(s.samples) ** 2))
    if p_sig == 0.0:
        raise ValueError("cannot set an SNR on an all-zero signal")
    sigma2 = p_sig / 10.0 ** (snr_db / 10.0)
    rng = np.random.default_rng(seed)
    n = s.samples.size
    noise = rng.standard_normal(2 * n).view(np.complex128) * np.sqrt(sigma2 / 2.0)
    return TimeSignal(samples=s.samples + noise, sample_rate=s.sample_rate,
                      oversampling=s.oversampling, frame_params=s.frame_params)
