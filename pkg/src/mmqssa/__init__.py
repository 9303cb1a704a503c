"""Stochastic and deterministic QSS analysis of the open Michaelis-Menten mechanism."""
