"""Dual witnesses, L1 approximation bounds and SQ experiments for smoothed majority."""

__version__ = "0.1.0"
