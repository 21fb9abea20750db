"""Length orthospectra of strictly convex bodies on flat tori.

Submodules: convex (support bodies, Steiner data), spherequad (sphere grids
and oscillatory integrals), spectrum (orthogeodesic enumeration), zetafns
(zeta and Poincare series, summation formulas), dynamics (correlations and
equidistribution), cli (experiment runner).
"""

__version__ = "0.1.0"

__all__ = ["convex", "spherequad", "spectrum", "zetafns", "dynamics", "__version__"]
