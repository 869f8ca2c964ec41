"""Numerical experiments around homoclinic tangencies and blenders.

The heavy lifting lives in the C++ extension; this package re-exports the
bound operations. Structured inputs (tangency models, blender specs,
horseshoe specs) are JSON strings in the same schemas the CLI uses.
"""

from ._blenderlab import (  # noqa: F401
    DomainError,
    Model,
    SchemaErrorException,
    classify,
    covering_criterion,
    domination_time,
    entropy_gap,
    rotation_eigenvalues,
    run,
    saddle_node_angle,
    tangency_circle,
    verify_superposition,
)

__all__ = [
    "DomainError",
    "Model",
    "SchemaErrorException",
    "classify",
    "covering_criterion",
    "domination_time",
    "entropy_gap",
    "rotation_eigenvalues",
    "run",
    "saddle_node_angle",
    "tangency_circle",
    "verify_superposition",
]
