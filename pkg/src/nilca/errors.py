"""Exception types shared across the package."""


class NilcaError(Exception):
    """Base class for all package errors."""


class FieldMismatchError(NilcaError):
    """Two scalars/vectors/algebras over distinct fields were combined."""


class ParentMismatchError(NilcaError):
    """Vectors from different algebras were combined."""


class ValidationError(NilcaError):
    """A structure-constant table failed validation.

    Attributes:
        condition: short tag of the first violated rule
            ("profile", "antisymmetry", "diagonal", "jacobi", "filtration").
        witness: tuple of 1-based indices witnessing the violation.
    """

    def __init__(self, condition: str, witness: tuple = (), detail: str = ""):
        self.condition = condition
        self.witness = witness
        msg = f"invalid table: {condition} violated"
        if witness:
            msg += f" at indices {witness}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class SearchTooLargeError(NilcaError):
    """A reordering search exceeded its configured dimension bound."""


class DimensionCapError(NilcaError):
    """A free-algebra construction exceeded its dimension cap."""


class BudgetError(NilcaError):
    """An enumeration exceeded its documented combinatorial budget."""


class EmbeddingError(NilcaError):
    """A claimed field or algebra embedding is not one."""


class PreconditionError(NilcaError):
    """An operation was called with inputs violating its contract."""


class FormatError(NilcaError):
    """A .lla/.emb/stage file could not be parsed."""
