"""Property-based testing of logic-program specifications via proof certificates."""

__version__ = "0.1.0"
