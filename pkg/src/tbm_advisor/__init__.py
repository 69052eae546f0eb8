"""Decision support for TBM operating parameters.

Physical cutter-force rules plus a physics-constrained neural mapping from
rock and muck observations to machine response, searched over an operating
grid for the cheapest feasible (penetration, RPM) pair.
"""

__version__ = "0.1.0"

from .errors import DomainError, FitError, InvalidInputError  # noqa: F401
from .physics import PhysicsRules, default_rules  # noqa: F401
