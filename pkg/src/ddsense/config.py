"""Experiment configuration and its TOML serialization.

The config file is a single human-readable TOML document; round-trips
through :func:`save_config`/:func:`load_config` are bit-stable because
floats are written with ``repr``.
"""

import os
from dataclasses import dataclass, field

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from .exceptions import ConfigError
from .frames import FrameParams
from .sensing import CfarConfig
from .waveforms import PulseSpec

WAVEFORMS = ("dd", "tf")
OUTPUT_DIR_ENV = "DDSENSE_OUTPUT_DIR"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a seeded experiment run depends on."""

    waveform: str = "both"  # dd | tf | both
    num_delay_bins: int = 16
    num_doppler_bins: int = 16
    slot_duration: float = 1.0
    pulse: PulseSpec = field(default_factory=PulseSpec)
    snr_grid_db: tuple = (-20.0, -15.0, -10.0, -7.5, -5.0, -2.5, 0.0, 5.0)
    trials: int = 2000
    target_kind: str = "off_grid_uniform"  # or on_grid_random_bin
    target_count: int = 1
    cfar: CfarConfig = field(default_factory=CfarConfig)
    calibration_maps: int = 1500
    master_seed: int = 0
    output_dir: str = "results"
    workers: int = 1
    refine: bool = False

    def __post_init__(self):
        if self.waveform not in WAVEFORMS + ("both",):
            raise ConfigError(f"waveform must be dd, tf, or both, got {self.waveform!r}")
        if self.target_kind not in ("on_grid_random_bin", "off_grid_uniform"):
            raise ConfigError(f"unknown target kind {self.target_kind!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if len(self.snr_grid_db) == 0:
            raise ConfigError("SNR grid must not be empty")
        object.__setattr__(self, "snr_grid_db",
                           tuple(float(s) for s in self.snr_grid_db))

    @property
    def frame(self) -> FrameParams:
        return FrameParams(self.num_delay_bins, self.num_doppler_bins,
                           self.slot_duration)

    @property
    def waveforms(self) -> tuple:
        return WAVEFORMS if self.waveform == "both" else (self.waveform,)

    def resolved_output_dir(self, override: str | None = None) -> str:
        return override or os.environ.get(OUTPUT_DIR_ENV) or self.output_dir


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, (tuple, list)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value)}")


def config_to_toml(cfg: ExperimentConfig) -> str:
    lines = ["[experiment]"]
    for key in ("waveform", "num_delay_bins", "num_doppler_bins",
                "slot_duration", "snr_grid_db", "trials", "target_kind",
                "target_count", "calibration_maps", "master_seed",
                "output_dir", "workers", "refine"):
        lines.append(f"{key} = {_fmt(getattr(cfg, key))}")
    lines += ["", "[experiment.pulse]"]
    for key in ("kind", "rolloff", "span", "oversampling"):
        lines.append(f"{key} = {_fmt(getattr(cfg.pulse, key))}")
    lines += ["", "[experiment.cfar]"]
    for key in ("guard_cells", "training_cells", "order_k", "alpha",
                "target_pfa"):
        lines.append(f"{key} = {_fmt(getattr(cfg.cfar, key))}")
    return "\n".join(lines) + "\n"


def save_config(cfg: ExperimentConfig, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(config_to_toml(cfg))


def config_from_dict(doc: dict) -> ExperimentConfig:
    try:
        exp = dict(doc["experiment"])
    except KeyError as exc:
        raise ConfigError("config file lacks an [experiment] table") from exc
    pulse = PulseSpec(**exp.pop("pulse", {}))
    cfar = CfarConfig(**exp.pop("cfar", {}))
    try:
        return ExperimentConfig(pulse=pulse, cfar=cfar, **exp)
    except TypeError as exc:
        raise ConfigError(f"bad experiment config: {exc}") from exc


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return config_from_dict(doc)
