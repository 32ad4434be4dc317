"""Finite-dimensional symplectic linear algebra toolkit.

Maslov indices of Lagrangian-pair paths under varying symplectic forms,
intrinsic symplectic reduction, spectral flow of Hermitian matrix and
linear-relation paths, and their coincidence on discretized Hamiltonian
boundary value problems.
"""

__version__ = "0.1.0"
