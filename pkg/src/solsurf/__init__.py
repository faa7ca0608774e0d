"""Soliton surfaces in sl(2,R) built from Lax pairs of the Painleve equations P1-P3."""
from __future__ import annotations

__version__ = "0.1.0"
