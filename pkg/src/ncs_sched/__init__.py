"""Probabilistic network scheduling and stochastic-stability tools for networked control systems."""

__version__ = "0.1.0"
