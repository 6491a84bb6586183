"""Genetic search over quantum-kernel feature maps for SVM classification."""

__version__ = "0.1.0"
