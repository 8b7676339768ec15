"""Two-layer robust-adaptive pitch control for a wind turbine in the full-load region."""
__version__ = "0.1.0"
