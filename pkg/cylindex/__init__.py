"""Cylindex: L2 kernels and equivariant index characters of perturbed Dirac operators on the cylinder."""

__version__ = "0.1.0"
