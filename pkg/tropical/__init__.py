"""Tropical complexes: charts, monodromy, discriminants, Legendre duality and serialization."""
