"""Data-side toolkit for 4D chemical dynamics understanding benchmarks.

Trajectory I/O, periodic geometry, text and graph-token encodings, SMILES
handling, benchmark metrics, NEB on toy potentials and scaffold splits.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    Cell,
    CatalyticRecord,
    EnergyProfile,
    Frame,
    ReactionRecord,
    ReactionType,
    Trajectory,
    displacement,
    make_frame,
    validate_trajectory,
)
from .elements import Element, element  # noqa: E402

__all__ = [
    "__version__",
    "Cell",
    "CatalyticRecord",
    "Element",
    "EnergyProfile",
    "Frame",
    "ReactionRecord",
    "ReactionType",
    "Trajectory",
    "displacement",
    "element",
    "make_frame",
    "validate_trajectory",
]
