"""Tools for deciding which prime-power level modular curves have infinitely many quadratic points."""

__version__ = "0.1.0"
