"""Builders for local models, affine elliptic surfaces and the global Schoen complexes."""
