"""Figure rendering for the delay-Doppler ISAC simulator's CSV outputs."""

from .render import FigureJob, FigureModel, build_model, render
from .schema import SchemaError

__version__ = "0.1.0"

__all__ = ["FigureJob", "FigureModel", "SchemaError", "build_model", "render"]
