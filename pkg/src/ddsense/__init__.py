"""Delay-Doppler ISAC waveform simulator.

Generates OTFS (delay-Doppler) and OFDM (time-frequency) frames, passes
them through point-scatterer channels, and runs a radar receive chain
(range-Doppler matched filtering, OS-CFAR, SIC) with Monte-Carlo
benchmarks emitting CSV artifacts.
"""

from .ambiguity import (AmbiguitySurface, cross_ambiguity, verify_eq1,
                        zero_delay_cut, zero_doppler_cut)
from .channel import (ChannelRealization, PointTarget, add_awgn,
                      apply_channel, delay_samples)
from .config import ExperimentConfig, load_config, save_config
from .frames import (DDGrid, FrameParams, TFGrid, TimeSignal,
                     critical_signal, dzt, idzt, isfft, sfft, slotwise_dft,
                     slotwise_idft)
from .sensing import (CfarConfig, Detection, RangeDopplerMap, calibrate_alpha,
                      estimate_parameters, lrt_statistic, os_cfar,
                      range_doppler_map, sic_detect, synthesize_echo)
from .waveforms import (PulseSpec, SymbolSource, matched_filter_rx,
                        modulate_ofdm, modulate_otfs_sfft, modulate_otfs_zak,
                        rrc_taps, shape_chips)

__version__ = "0.1.0"

__all__ = [
    "AmbiguitySurface", "CfarConfig", "ChannelRealization", "DDGrid",
    "Detection", "ExperimentConfig", "FrameParams", "PointTarget",
    "PulseSpec", "RangeDopplerMap", "SymbolSource", "TFGrid", "TimeSignal",
    "add_awgn", "apply_channel", "calibrate_alpha", "critical_signal",
    "cross_ambiguity", "delay_samples", "dzt", "estimate_parameters", "idzt",
    "isfft", "load_config", "lrt_statistic", "matched_filter_rx",
    "modulate_ofdm", "modulate_otfs_sfft", "modulate_otfs_zak", "os_cfar",
    "range_doppler_map", "rrc_taps", "save_config", "sfft", "shape_chips",
    "sic_detect", "slotwise_dft", "slotwise_idft", "synthesize_echo",
    "verify_eq1", "zero_delay_cut", "zero_doppler_cut",
]
