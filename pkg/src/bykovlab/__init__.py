"""Numerical laboratory for the unfolding of a Bykov heteroclinic attractor.

The package is organised around the two-dimensional first return map of the
unfolded network, its one-dimensional circle-map singular limit, a rank-one
hypothesis audit, orbit statistics / regime classification, and a batch CLI.
"""

__version__ = "0.1.0"
