"""Spin, optical and envelope models for charged GaAs quantum dots."""

__version__ = "0.1.0"
