"""Branch and bound with emulated quantum subroutines."""

__version__ = "0.1.0"
