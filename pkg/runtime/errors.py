"""
Error types shared by the schema loader, the codec, the target and the controller.

Every error carries a stable ``code`` string so callers (and logs) can tell failures apart
without matching on messages.
"""


class RuntimeControlError(Exception):
    """Base class for all runtime-control errors."""
    code = "RUNTIME_ERROR"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def __str__(self):
        return f"{self.code}: {self.message}"


class MalformedSchemaError(RuntimeControlError):
    """The schema document is not syntactically valid JSON of the expected shape."""
    code = "MALFORMED_SCHEMA"


class InvalidSchemaError(RuntimeControlError):
    """The schema document parsed but violates a semantic rule."""
    code = "INVALID_SCHEMA"

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class NotFoundError(RuntimeControlError):
    """A named or numbered schema element does not exist."""
    code = "NOT_FOUND"


class EncodeInvariantError(RuntimeControlError):
    """A message handed to the encoder violates a type invariant."""
    code = "ENCODE_INVARIANT"


class MalformedFrameError(RuntimeControlError):
    """A byte string is not a valid frame."""
    code = "MALFORMED"

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class InvalidKeyError(RuntimeControlError):
    """A match key does not fit the table it targets."""
    code = "INVALID_KEY"


class InvalidActionError(RuntimeControlError):
    """An action name/id or its parameters do not fit the table."""
    code = "INVALID_ACTION"


class ValueOverflowError(RuntimeControlError):
    """A value does not fit the bit width of its field."""
    code = "VALUE_OVERFLOW"


class SchemaMismatchError(RuntimeControlError):
    """Controller and target disagree on the program, or a table is unknown."""
    code = "SCHEMA_MISMATCH"


class ConnectFailedError(RuntimeControlError):
    """The target could not be reached."""
    code = "CONNECT_FAILED"


class TransportError(RuntimeControlError):
    """The connection to the target was lost."""
    code = "TRANSPORT_ERROR"


class RemoteMalformedError(RuntimeControlError):
    """The target sent a frame the controller could not decode."""
    code = "REMOTE_MALFORMED"


class ZeroDurationError(RuntimeControlError, ZeroDivisionError):
    """A rate was requested for a zero (or negative) duration."""
    code = "DIVIDE_BY_ZERO"


class InsufficientSamplesError(RuntimeControlError):
    """Too few samples for a confidence interval."""
    code = "INSUFFICIENT_SAMPLES"


class BenchmarkRunError(RuntimeControlError):
    """A benchmark run failed; carries where it happened."""
    code = "RUN_FAILED"

    def __init__(self, message: str, batch_size: int, run_index: int):
        super().__init__(f"batch_size={batch_size} run={run_index}: {message}")
        self.batch_size = batch_size
        self.run_index = run_index
