"""Class groups, p-ramification torsion and epsilon statistics for
quadratic and cyclic cubic fields."""

__version__ = "0.1.0"
