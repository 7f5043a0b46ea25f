"""Repetitive quantum codes under energy relaxation: closed forms, a Kraus
scenario oracle, a two-qubit protocol simulator and correction search."""

from .report import FidelityReport

__all__ = ["FidelityReport"]
__version__ = "0.1.0"
