"""Exact computation on ordered abelian groups given as finite lexicographic products."""
from __future__ import annotations

__version__ = "0.1.0"
