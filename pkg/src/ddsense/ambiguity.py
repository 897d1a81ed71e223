"""Cross/auto ambiguity surfaces, their zero cuts, and the basis-function
correlation identity check.

Convention (matching the matched-filter receiver, so a range-Doppler map
is a sampled ambiguity surface):

    A(tau, nu) = sum_i s1[i] * conj(s2(i*Ts - tau)) * exp(-j2pi nu i Ts)

with the delayed copy produced by the channel module's band-limited
shift.  Surfaces store axes normalized by T (delay) and 1/T (Doppler).
"""

from dataclasses import dataclass, field

import numpy as np

from .channel import delay_samples
from .exceptions import AxisOutOfRange, MissingOrigin
from .frames import FrameParams, TimeSignal
from .waveforms import PulseSpec, SymbolSource, modulate_otfs_zak

DB_FLOOR = -80.0


@dataclass(frozen=True)
class AmbiguitySurface:
    """Complex ambiguity values over (delay, Doppler) offsets.

    ``delay_axis`` is in units of T and ``doppler_axis`` in units of 1/T;
    ``values[i, j]`` corresponds to ``(delay_axis[i], doppler_axis[j])``.
    """

    delay_axis: np.ndarray
    doppler_axis: np.ndarray
    values: np.ndarray = field(repr=False)
    params: FrameParams

    def __post_init__(self):
        object.__setattr__(self, "delay_axis", np.asarray(self.delay_axis, float))
        object.__setattr__(self, "doppler_axis", np.asarray(self.doppler_axis, float))
        object.__setattr__(self, "values", np.asarray(self.values, np.complex128))
        if self.values.shape != (self.delay_axis.size, self.doppler_axis.size):
            raise ValueError("surface shape does not match its axes")
        for ax in (self.delay_axis, self.doppler_axis):
            if ax.size > 1 and not np.all(np.diff(ax) > 0):
                raise ValueError("axes must be strictly increasing")

    @property
    def peak_magnitude(self) -> float:
        return float(np.max(np.abs(self.values)))

    def magnitude_db(self, floor: float = DB_FLOOR) -> np.ndarray:
        """Magnitude normalized to the global peak, in dB, clamped."""
        mag = np.abs(self.values) / self.peak_magnitude
        with np.errstate(divide="ignore"):
            db = 20.0 * np.log10(mag)
        return np.maximum(db, floor)


def cross_ambiguity(s1: TimeSignal, s2: TimeSignal, delay_axis, doppler_axis) -> AmbiguitySurface:
    """Cross-ambiguity of ``s1`` against delayed/Doppler-shifted ``s2``.

    ``delay_axis`` is in seconds, ``doppler_axis`` in Hz; both must stay
    within the signal support and the Nyquist span.
    """
    if s1.sample_rate != s2.sample_rate:
        raise ValueError("signals must share a sample rate")
    fs = s1.sample_rate
    delay_axis = np.asarray(delay_axis, float)
    doppler_axis = np.asarray(doppler_axis, float)
    max_span = max(len(s1), len(s2)) / fs
    if delay_axis.size and np.max(np.abs(delay_axis)) > max_span:
        raise AxisOutOfRange("delay axis exceeds the signal duration")
    if doppler_axis.size and np.max(np.abs(doppler_axis)) > fs / 2:
        raise AxisOutOfRange("Doppler axis exceeds the Nyquist span")
    n = len(s1)
    t = np.arange(n) / fs
    ramps = np.exp(-2j * np.pi * np.outer(doppler_axis, t))  # [nu, i]
    values = np.empty((delay_axis.size, doppler_axis.size), np.complex128)
    for i, tau in enumerate(delay_axis):
        shifted = delay_samples(s2.samples, tau * fs, pad_to=n)
        values[i] = ramps @ (s1.samples * np.conj(shifted))
    params = s1.frame_params
    return AmbiguitySurface(delay_axis=delay_axis / params.slot_duration,
                            doppler_axis=doppler_axis * params.slot_duration,
                            values=values, params=params)


def _origin_index(axis: np.ndarray) -> int:
    hits = np.flatnonzero(np.isclose(axis, 0.0, atol=1e-12))
    if hits.size == 0:
        raise MissingOrigin("axis does not contain 0")
    return int(hits[0])


def zero_doppler_cut(surface: AmbiguitySurface):
    """(normalized delay axis, dB magnitude) slice at nu = 0."""
    j = _origin_index(surface.doppler_axis)
    mag = np.abs(surface.values[:, j])
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag / np.max(mag))
    return surface.delay_axis.copy(), np.maximum(db, DB_FLOOR)


def zero_delay_cut(surface: AmbiguitySurface):
    """(normalized Doppler axis, dB magnitude) slice at tau = 0."""
    i = _origin_index(surface.delay_axis)
    mag = np.abs(surface.values[i, :])
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag / np.max(mag))
    return surface.doppler_axis.copy(), np.maximum(db, DB_FLOOR)


def _pulsone(l0: int, k0: int, params: FrameParams, pulse: PulseSpec) -> TimeSignal:
    src = SymbolSource(kind="single_impulse", impulse_delay_bin=l0,
                       impulse_doppler_bin=k0)
    return modulate_otfs_zak(src.dd_grid(params), pulse)


def verify_eq1(l1: int, k1: int, l2: int, k2: int, params: FrameParams,
               pulse: PulseSpec | None = None) -> float:
    """Residual of the basis-function cross-correlation identity.

    For pulsones at bins (l1, k1) and (l2, k2) the cross-ambiguity of the
    pair around the zero offset must reproduce the delay-Doppler-shifted
    auto-ambiguity of the (0, 0) pulsone up to a closed-form phase.  With
    the prototype-pulse ambiguity referenced to the shifted copy,

        A21(dt, dv) * exp(j2pi dv (tau1 + dt))
            = exp(j2pi nu2 (tau1 + dt - tau2))
              * A_ref(tau1 - tau2 + dt, nu1 - nu2 + dv),

    exact for unwindowed pulsones and approximate once truncation or
    filtering enters.  Returns max |lhs - rhs| over a neighbourhood of
    the main lobe, relative to the largest |A_ref| on that neighbourhood.
    """
    if pulse is None:
        pulse = PulseSpec(kind="rectangular", rolloff=0.0, oversampling=1)
    for l, k in ((l1, k1), (l2, k2)):
        if not (0 <= l < params.M and 0 <= k < params.N):
            raise ValueError(f"bin ({l}, {k}) outside the grid")
    tau1, tau2 = l1 * params.delay_resolution, l2 * params.delay_resolution
    nu1, nu2 = k1 * params.doppler_resolution, k2 * params.doppler_resolution
    phi1 = _pulsone(l1, k1, params, pulse)
    phi2 = _pulsone(l2, k2, params, pulse)
    phi0 = _pulsone(0, 0, params, pulse)

    # neighbourhood of the pair's main lobe, which sits at the offset
    # cancelling the bin separation: +-2 samples in delay, half a Doppler
    # bin either side in Doppler
    d_tau = (tau2 - tau1) + np.arange(-2, 3) / phi0.sample_rate
    d_nu = (nu2 - nu1) + np.linspace(-0.5, 0.5, 5) * params.doppler_resolution
    lhs = cross_ambiguity(phi2, phi1, d_tau, d_nu).values
    ref = cross_ambiguity(phi0, phi0, tau1 - tau2 + d_tau, nu1 - nu2 + d_nu)
    # re-reference the prototype ambiguity to the shifted copy; the
    # surface axes are normalized by T and 1/T so their outer product is
    # the absolute delay-Doppler product
    a_ref = ref.values * np.exp(2j * np.pi * np.outer(ref.delay_axis,
                                                      ref.doppler_axis))
    dt = d_tau[:, None]
    dv = d_nu[None, :]
    lhs_aligned = lhs * np.exp(2j * np.pi * dv * (tau1 + dt))
    rhs = np.exp(2j * np.pi * nu2 * (tau1 + dt - tau2)) * a_ref
    scale = np.max(np.abs(a_ref))
    return float(np.max(np.abs(lhs_aligned - rhs)) / scale)
