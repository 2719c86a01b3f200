"""Batch text-to-vector export with pretrained transformer encoders."""

from .exporter import (
    DEFAULT_MODEL,
    ExportError,
    ExportJob,
    ExportSummary,
    InputFormatError,
    ModelLoadError,
    ZeroTokenError,
    export,
    load_encoder,
    read_inputs,
)

__version__ = "0.1.0"
