"""Exception hierarchy. Every error carries enough context to reproduce it."""


class FacadeError(Exception):
    """Base class for all errors raised by the engine."""


class SyntaxErrorWithPosition(FacadeError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


class RdfSyntaxError(SyntaxErrorWithPosition):
    pass


class QueryParseError(SyntaxErrorWithPosition):
    pass


class ConfigError(FacadeError):
    """Invalid option value, option combination or inline configuration."""


class ConflictingSourceError(ConfigError):
    pass


class UnsupportedFeatureError(ConfigError):
    pass


class SourceError(FacadeError):
    def __init__(self, message: str, source: str):
        super().__init__(f"{message}: {source}")
        self.source = source


class NoSourceError(SourceError):
    pass


class MissingFileError(SourceError):
    pass


class HttpStatusError(SourceError):
    def __init__(self, status: int, url: str):
        super().__init__(f"HTTP status {status}", url)
        self.status = status


class CommandFailedError(SourceError):
    def __init__(self, command: str, returncode: int, stderr: str):
        detail = f"command exited with status {returncode}"
        if stderr.strip():
            detail += f" ({stderr.strip()})"
        super().__init__(detail, command)
        self.returncode = returncode
        self.stderr = stderr


class UnsupportedSchemeError(SourceError):
    pass


class LocalSourceDisabledError(SourceError):
    pass


class TriplifierError(FacadeError):
    """A source could not be parsed by its format-specific triplifier."""


class EvaluationError(FacadeError):
    pass


class UnresolvedServiceError(EvaluationError):
    pass


class UnsupportedEndpointError(EvaluationError):
    pass


class ServiceError(FacadeError):
    """Wraps a failure inside a SERVICE clause with the service IRI."""

    def __init__(self, service: str, cause: Exception):
        super().__init__(f"SERVICE <{service}>: {cause}")
        self.service = service
        self.cause = cause


class QueryTimeoutError(EvaluationError):
    pass
