"""Low-discrepancy sequences, discrepancy measures and quasi-Monte Carlo cubature."""

__version__ = "0.1.0"
