"""qcomplete: quantum-completeness criteria for singular Riemannian models.

Decides essential self-adjointness criteria for non-complete Riemannian and
almost-Riemannian models: symbolic effective potentials, threshold checks,
exact and numerical Riccati comparison solutions, and an independent
limit-point/limit-circle endpoint oracle.
"""

__version__ = "0.1.0"

from . import ars, criteria, effpot, expr, riccati, weyl  # noqa: F401

__all__ = ["expr", "effpot", "riccati", "weyl", "criteria", "ars", "__version__"]
