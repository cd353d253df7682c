"""Imagery BCI: offline VI/MI decoder training, streaming online decoding and simulated robot execution."""

__version__ = "0.1.0"
