"""Simulation engine for the coherently driven, damped Jaynes-Cummings oscillator."""

from __future__ import annotations

__version__ = "0.1.0"
