"""Certified lower bounds on the relative entropy of coherence from scarce data."""
__version__ = "0.1.0"
