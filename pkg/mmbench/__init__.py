"""mmbench - concentration of measure on finite metric measure spaces."""

__version__ = "0.1.0"
