"""Exception types shared across the engine."""


class ShapeError(ValueError):
    """Tensor shapes do not satisfy an operation's contract."""


class DataError(RuntimeError):
    """Dataset is missing, empty, or produced an invalid sample."""


class CheckpointError(RuntimeError):
    """Checkpoint file is malformed or of an unsupported version."""


class UsageError(Exception):
    """Caller invoked a command or API with invalid arguments.

    Mapped to exit code 2 by the CLI, as opposed to runtime failures
    which exit with 1.
    """
