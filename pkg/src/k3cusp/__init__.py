"""Exact combinatorics of cusp models for degenerations of degree-two K3 surfaces."""
from __future__ import annotations

__version__ = "0.1.0"
