"""Stable-law densities, inverse stable subordinators and fractional diffusion."""
