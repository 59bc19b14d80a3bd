"""nilca: exact calculator for nilpotent Lazard Lie algebras."""

__version__ = "0.1.0"

from .fields import GF, QQ, Field, FieldEmbedding, Scalar, find_embedding
from .lla import (
    LLA,
    Morphism,
    Profile,
    Subspace,
    Vec,
    lla_from_text,
    lla_to_text,
    load_lla,
    save_lla,
    validate_any_order,
    validate_ordered,
)

__all__ = [
    "GF",
    "QQ",
    "Field",
    "FieldEmbedding",
    "Scalar",
    "find_embedding",
    "LLA",
    "Morphism",
    "Profile",
    "Subspace",
    "Vec",
    "lla_from_text",
    "lla_to_text",
    "load_lla",
    "save_lla",
    "validate_any_order",
    "validate_ordered",
    "__version__",
]
