"""Exception hierarchy. Every error raised by the package derives from QEESError."""


class QEESError(ValueError):
    pass


class NonFiniteValue(QEESError):
    def __init__(self, index: int):
        super().__init__(f"non-finite value at index {index}")
        self.index = index


class DimensionMismatch(QEESError):
    pass


class InvalidLength(QEESError):
    pass


class OddPopulation(QEESError):
    pass


class TableTooShort(QEESError):
    pass


class OffsetOutOfRange(QEESError):
    pass


class TooFewSamples(QEESError):
    pass


class LengthMismatch(QEESError):
    pass


class NonFiniteGradient(QEESError):
    pass


class ConfigError(QEESError):
    """Invalid run configuration. ``field`` names the offending key when known."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(field)
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
        self.field = field
        self.line = line


class CheckpointError(QEESError):
    pass


class RunFailure(QEESError):
    """A module error raised while running generation ``generation``."""

    def __init__(self, generation: int, cause: BaseException):
        super().__init__(f"generation {generation} failed: {cause}")
        self.generation = generation
        self.cause = cause
