"""Numerics for the transverse-field Ising chain and the mean-spherical
quantum spin model, verified against independent finite-size oracles."""

__version__ = "0.1.0"
