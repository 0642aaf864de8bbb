"""Renderers turning leosim CSV reports into figures."""

__version__ = "0.1.0"
