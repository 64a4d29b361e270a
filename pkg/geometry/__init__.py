"""Exact lattice geometry: vectors, unimodular maps, polytopes, polygons and legal loops."""
