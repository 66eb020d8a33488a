"""Exact heights, Chow forms, Hilbert weights and twisted heights on small projective varieties."""

from .fields import QQ, FieldElement, NumberField, Place
from .logheight import LogHeight, UndecidableError

__version__ = "0.1.0"

__all__ = ["QQ", "FieldElement", "NumberField", "Place", "LogHeight", "UndecidableError"]
