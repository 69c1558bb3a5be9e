"""Variational quantum classifiers for card-fraud detection on a dense statevector simulator."""

__version__ = "0.1.0"
