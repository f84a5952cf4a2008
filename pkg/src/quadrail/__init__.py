"""Quad-rail lattice simulator and compiler for Gaussian measurement-based computation."""
