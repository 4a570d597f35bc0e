"""Bayesian stochastic volatility models with time-varying skewness."""

__version__ = "0.1.0"
