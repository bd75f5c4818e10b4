"""Exact-arithmetic toolkit for (folded) Auslander-Reiten quivers,
order statistics, fundamental modules over quantum affine algebras of
exceptional type, normalized R-matrix eigenvalues, and denominator
formulas."""

__version__ = "0.1.0"
