"""Dual-tower TCN encoders and their benchmark harness on a numpy autodiff engine."""

__version__ = "0.1.0"
