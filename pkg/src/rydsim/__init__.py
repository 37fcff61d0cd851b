"""Pulse-level emulator of a neutral-atom (Rydberg) quantum processor."""

__version__ = "0.1.0"
