"""Intrinsic anomaly detection for environment/system time series."""

__version__ = "0.1.0"
