"""Exception types raised across the package."""


class PdSenseError(Exception):
    """Base class for all package errors."""


class NadirSingularity(PdSenseError, ValueError):
    """The radar lies on the body z axis, so the RCS azimuth is undefined."""


class ZeroRange(PdSenseError, ValueError):
    """Aircraft and radar positions coincide."""


class InvalidPfa(PdSenseError, ValueError):
    pass


class DegenerateModel(PdSenseError, ValueError):
    pass


class InvalidCovariance(PdSenseError, ValueError):
    pass


class DimensionMismatch(PdSenseError, ValueError):
    pass


class IndexOutOfRange(PdSenseError, IndexError):
    pass


class ConfigError(PdSenseError):
    """Base for configuration problems (CLI exit status 2)."""


class ParseError(ConfigError, ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class ValidationError(ConfigError, ValueError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
