"""TESLA-based broadcast authentication for ADS-B with a phase-overlay physical layer."""

__version__ = "0.1.0"
