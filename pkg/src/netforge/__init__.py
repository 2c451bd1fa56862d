"""netforge: neural network model editing, conversion, and layout engine."""

__version__ = "0.1.0"
