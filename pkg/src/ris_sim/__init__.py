"""Stochastic-geometry toolkit for interference propagation in large-scale
multi-surface cellular downlinks: closed-form signal/interference/outage
analysis, an SIS epidemic layer, and Monte Carlo validation harnesses."""

__version__ = "0.1.0"
