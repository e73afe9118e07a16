"""Distributed transmission-line model of body-resonance human body communication."""

__version__ = "0.1.0"
