"""Multigrid preconditioners for CN-WSGD discretizations of 2D space-fractional diffusion."""

__version__ = "0.1.0"
