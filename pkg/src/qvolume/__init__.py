"""Exact-arithmetic toolkit for extremal box volumes of multivariate quasi-copulas.

Computes the minimal and maximal signed volume a box can receive under any
d-variate quasi-copula by building and solving exact rational linear programs,
constructs explicit piecewise-multilinear quasi-copula witnesses from optimal
grid solutions, and verifies every claim that is checkable in exact rational
arithmetic.
"""

__version__ = "0.1.0"
