"""Phase-space WKB and Wigner function toolkit."""

__version__ = "0.1.0"
