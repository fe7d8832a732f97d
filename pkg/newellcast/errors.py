"""Exception hierarchy for newellcast"""

from typing import Any, Dict, Optional


class NewellcastError(Exception):
    """Base class for all newellcast errors"""

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = context

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable form used by the CLI on failure"""
        return {
            "error": type(self).__name__,
            "message": self.message,
            "context": {k: _jsonable(v) for k, v in self.context.items()},
        }

    def __reduce__(self) -> Any:
        return _restore, (type(self), self.message, self.context)


class ValidationError(NewellcastError, ValueError):
    """An argument or field value is out of its allowed range"""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}", field=field)
        self.field = field


class DomainError(NewellcastError, ValueError):
    """A density lies outside [0, kj]"""


class GridMismatchError(NewellcastError, ValueError):
    """Two cumulative curves do not share a knot grid"""


class InsufficientDataError(NewellcastError):
    """Too few usable intervals or samples"""

    def __init__(self, message: str, count: int):
        super().__init__(message, count=count)
        self.count = count


class UnsupportedVariant(NewellcastError):
    """Feature variant is undefined for the given source layout"""

    def __init__(self, message: str, context: Optional[str] = None):
        super().__init__(message, scenario=context)
        self.scenario = context


class ShapeError(NewellcastError, ValueError):
    """Network layers do not compose or an input has the wrong shape"""

    def __init__(self, message: str, layer: str):
        super().__init__(f"{layer}: {message}", layer=layer)
        self.layer = layer


class CFLViolation(NewellcastError):
    """Simulated densities left [0, kj]"""

    def __init__(self, message: str, step: int):
        super().__init__(message, step=step)
        self.step = step


class IngestError(NewellcastError):
    """Detector file is malformed or has unfixable gaps"""

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        super().__init__(message, line=line, path=path)
        self.line = line


class ConfigError(NewellcastError):
    """Run configuration is invalid; path is the dotted field path"""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}", path=path)
        self.path = path


def _jsonable(value: Any) -> Any:
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    return str(value)


def _restore(cls: type, message: str, context: Dict[str, Any]) -> NewellcastError:
    """Unpickling hook shared by every subclass"""
    error = cls.__new__(cls)
    NewellcastError.__init__(error, message, **context)
    for key, value in context.items():
        setattr(error, key, value)
    return error
