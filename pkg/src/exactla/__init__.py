"""Exact linear algebra over word-size prime fields and the integers."""

from .field_arith import ZZ, IntegerRing, PrimeField

__version__ = "0.1.0"

__all__ = ["PrimeField", "IntegerRing", "ZZ", "__version__"]
