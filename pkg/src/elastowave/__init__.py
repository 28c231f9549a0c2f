"""Spectral element solver for coupled elasto-acoustic wave propagation.

Elastic regions carry a displacement formulation with interior-penalty DG
coupling between conforming macroblocks; acoustic regions carry a velocity
potential.  The two are tied through interface integrals evaluated on
mortar-style intersection quadrature, so the grids on either side of the
fluid-solid interface do not need to match.
"""

__version__ = "0.1.0"
