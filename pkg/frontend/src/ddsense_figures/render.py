"""Deterministic figure rendering from validated CSV rows.

Every renderer first builds a plain data model holding exactly the
values parsed from the CSV (``FigureModel.series``), then draws it; the
model is what tests round-trip against the input files.  Output is
byte-stable: fixed canvas, pinned SVG hash salt, no timestamps.
"""

from dataclasses import dataclass, field

import matplotlib
import numpy as np

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "ddsense-figures"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .schema import SchemaError, read_rows  # noqa: E402

DB_FLOOR = -80.0
FIGSIZE = (7.0, 4.5)
DPI = 120


@dataclass(frozen=True)
class FigureJob:
    """One rendering request: input CSVs, figure kind, output path."""

    kind: str  # cuts | rdmap3d | pd | mse
    inputs: tuple
    output: str
    db_floor: float = DB_FLOOR
    image_format: str = "svg"

    def __post_init__(self):
        if self.kind not in ("cuts", "rdmap3d", "pd", "mse"):
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if self.image_format not in ("svg", "png"):
            raise ValueError(f"unsupported format {self.image_format!r}")
        object.__setattr__(self, "inputs", tuple(self.inputs))


@dataclass
class FigureModel:
    """Parsed plot data: label -> dict of named float arrays."""

    kind: str
    series: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)


def _floats(rows, col):
    return np.array([float(r[col]) for r in rows])


def build_cuts_model(job: FigureJob) -> FigureModel:
    model = FigureModel(kind="cuts")
    for path in job.inputs:
        rows = read_rows(path, "cuts")
        for row in rows:
            label = f"{row['waveform']} ({row['axis_kind']})"
            entry = model.series.setdefault(label, {"x": [], "y": []})
            entry["x"].append(float(row["normalized_value"]))
            entry["y"].append(float(row["magnitude_db"]))
    for entry in model.series.values():
        entry["x"] = np.array(entry["x"])
        entry["y"] = np.array(entry["y"])
    kinds = {label.split("(")[1] for label in model.series}
    model.meta["xlabel"] = ("delay / T" if kinds == {"delay)"}
                            else "Doppler * T" if kinds == {"doppler)"}
                            else "normalized offset")
    return model


def build_rdmap_model(job: FigureJob) -> FigureModel:
    if len(job.inputs) != 2:
        raise SchemaError("rdmap3d needs exactly two inputs: map CSV then "
                          "threshold CSV")
    model = FigureModel(kind="rdmap3d")
    for label, path in zip(("map", "threshold"), job.inputs):
        rows = read_rows(path, "rdmap")
        l_bins = _floats(rows, "delay_bin").astype(int)
        k_bins = _floats(rows, "doppler_bin").astype(int)
        power = _floats(rows, "power_db")
        m, n = l_bins.max() + 1, k_bins.max() + 1
        if len(rows) != m * n or len(set(zip(l_bins, k_bins))) != m * n:
            raise SchemaError(f"{path}: cells do not tile an {m}x{n} grid")
        grid = np.empty((m, n))
        grid[l_bins, k_bins] = power
        model.series[label] = {"grid": grid, "power_db": power,
                               "delay_bin": l_bins, "doppler_bin": k_bins}
    if model.series["map"]["grid"].shape != model.series["threshold"]["grid"].shape:
        raise SchemaError("map and threshold grids differ in shape")
    return model


def _curve_model(job: FigureJob, schema: str, columns) -> FigureModel:
    model = FigureModel(kind=job.kind)
    for path in job.inputs:
        rows = read_rows(path, schema)
        for wf in sorted({r["waveform"] for r in rows}):
            sub = [r for r in rows if r["waveform"] == wf]
            model.series[wf] = {col: _floats(sub, col) for col in columns}
    return model


def build_pd_model(job: FigureJob) -> FigureModel:
    return _curve_model(job, "pd", ("snr_db", "pd", "pd_wilson_lo",
                                    "pd_wilson_hi"))


def build_mse_model(job: FigureJob) -> FigureModel:
    return _curve_model(job, "mse", ("snr_db", "mse_delay_bins2",
                                     "mse_doppler_bins2"))


MODEL_BUILDERS = {
    "cuts": build_cuts_model,
    "rdmap3d": build_rdmap_model,
    "pd": build_pd_model,
    "mse": build_mse_model,
}


def build_model(job: FigureJob) -> FigureModel:
    return MODEL_BUILDERS[job.kind](job)


def _draw_cuts(model: FigureModel, ax, db_floor):
    for label, entry in sorted(model.series.items()):
        ax.plot(entry["x"], np.maximum(entry["y"], db_floor), label=label,
                linewidth=1.0)
    ax.set_xlabel(model.meta.get("xlabel", "normalized offset"))
    ax.set_ylabel("magnitude (dB)")
    ax.set_ylim(db_floor, 3.0)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper right")


def _draw_pd(model: FigureModel, ax):
    for wf, entry in sorted(model.series.items()):
        ax.plot(entry["snr_db"], entry["pd"], marker="o", markersize=3,
                linewidth=1.0, label=wf)
        ax.fill_between(entry["snr_db"], entry["pd_wilson_lo"],
                        entry["pd_wilson_hi"], alpha=0.15)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("detection probability")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="lower right")


def _draw_mse(model: FigureModel, ax):
    styles = {"mse_delay_bins2": ("o", "delay"), "mse_doppler_bins2": ("s", "Doppler")}
    for wf, entry in sorted(model.series.items()):
        for col, (marker, what) in styles.items():
            ax.semilogy(entry["snr_db"], entry[col], marker=marker,
                        markersize=3, linewidth=1.0, label=f"{wf} {what}")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("MSE (bins$^2$)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="upper right")


def _draw_rdmap3d(fig, model: FigureModel, db_floor):
    ax = fig.add_subplot(projection="3d")
    grid = np.maximum(model.series["map"]["grid"], db_floor)
    thr = np.maximum(model.series["threshold"]["grid"], db_floor)
    m, n = grid.shape
    ll, kk = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    ax.plot_surface(ll, kk, grid, cmap="viridis", rstride=1, cstride=1,
                    linewidth=0.1, antialiased=True)
    # adaptive threshold as the transparent layer above the map
    ax.plot_surface(ll, kk, thr, color="tab:red", alpha=0.35, rstride=1,
                    cstride=1, linewidth=0)
    ax.set_xlabel("delay bin")
    ax.set_ylabel("Doppler bin")
    ax.set_zlabel("power (dB)")
    ax.view_init(elev=28, azim=-60)


def render(job: FigureJob) -> str:
    """Render one figure job to its output path; returns the path."""
    model = build_model(job)
    fig = plt.figure(figsize=FIGSIZE, dpi=DPI)
    if job.kind == "rdmap3d":
        _draw_rdmap3d(fig, model, job.db_floor)
    else:
        ax = fig.add_subplot()
        if job.kind == "cuts":
            _draw_cuts(model, ax, job.db_floor)
        elif job.kind == "pd":
            _draw_pd(model, ax)
        else:
            _draw_mse(model, ax)
    fig.tight_layout()
    fig.savefig(job.output, format=job.image_format,
                metadata=_stable_metadata(job.image_format))
    plt.close(fig)
    return job.output


def _stable_metadata(image_format: str):
    if image_format == "svg":
        return {"Date": None}
    return {}
