"""Numerics for pathwise growth bounds driven by increasing processes."""
