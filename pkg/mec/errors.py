"""Exception hierarchy shared by the library, the protocol package and the CLI.

Every error is a ``ValueError`` so callers can keep catching the broad type.
"""


class MecError(ValueError):
    """Base class for all library errors."""


class PreconditionError(MecError):
    """An input violates an operation's precondition."""


class TreeSyntaxError(PreconditionError):
    """Access-tree text does not follow the s-expression grammar."""


class FieldMismatchError(PreconditionError):
    """Two matrices or vectors live over different fields."""


class NotPartitionedError(PreconditionError):
    """A partitioned-only builder received a tree that reuses a node."""


class ScenarioError(PreconditionError):
    """A simulator scenario is malformed or illegal."""


class CapacityError(PreconditionError):
    """A configured size cap was exceeded."""


class InsufficientError(MecError):
    """The supplied node set cannot reconstruct the file."""


class InvariantBreach(MecError):
    """An internal invariant failed; indicates a bug, not bad input."""
