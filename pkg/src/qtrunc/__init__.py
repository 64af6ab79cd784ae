"""Truncations of group C*-algebras with certified quantum Gromov-Hausdorff bounds."""

__version__ = "0.1.0"
