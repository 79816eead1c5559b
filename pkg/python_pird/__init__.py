"""Partial information rate decomposition for stationary Gaussian processes."""
