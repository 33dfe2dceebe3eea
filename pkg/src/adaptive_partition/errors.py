"""Exception hierarchy shared by every layer of the package."""


class AdaptivePartitionError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(AdaptivePartitionError, ValueError):
    """Mismatched key-space kinds or otherwise invalid arguments."""


class InvalidPointError(UsageError):
    pass


class ConfigError(AdaptivePartitionError, ValueError):
    pass


class DegenerateSplitError(AdaptivePartitionError):
    """The range is too small to be bisected any further."""


class IndexCorruptionError(AdaptivePartitionError):
    """The main index broke one of its structural invariants."""


class DuplicateCloseError(AdaptivePartitionError):
    """A table already has a pending close scheduled."""


class PlacementError(AdaptivePartitionError):
    pass


class InsufficientServersError(PlacementError):
    pass


class InsufficientLocationsError(PlacementError):
    pass


class TableUnavailableError(AdaptivePartitionError):
    def __init__(self, table_id: int, message: str | None = None):
        self.table_id = table_id
        super().__init__(message or f"table {table_id} has no available replica")


class NodeOfflineError(AdaptivePartitionError):
    pass


class UnknownNodeError(AdaptivePartitionError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class DuplicateNodeError(AdaptivePartitionError):
    pass


class OutOfOrderError(AdaptivePartitionError, ValueError):
    """A record's reported time does not match the simulation clock."""


class ArchivedTableError(AdaptivePartitionError):
    pass


class NotEligibleError(AdaptivePartitionError):
    """The table cannot be archived yet (still live or within retention)."""


class ArchiveFormatError(AdaptivePartitionError, ValueError):
    pass


class ChecksumMismatchError(ArchiveFormatError):
    pass


class IdConflictError(AdaptivePartitionError):
    pass


class ScriptError(AdaptivePartitionError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
