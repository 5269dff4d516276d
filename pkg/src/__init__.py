"""
Annuli: Lattice Points in Thin Elliptic Annuli

A numerical laboratory for rectangular lattices ⟨1, iα⟩: exact and smoothed
counting, ensemble statistics of the annulus remainder, Diophantine
diagnostics and Epstein zeta evaluation.
"""

__version__ = "0.1.0"
__author__ = "Annuli Team"
