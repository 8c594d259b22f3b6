"""Simulation and analysis of post-selected multi-photon GHZ experiments."""
