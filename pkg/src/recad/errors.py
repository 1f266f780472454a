"""Error hierarchy with machine-readable failure categories.

Every failure that can be attributed to input data (rather than a caller
bug) derives from :class:`RecadError` and carries a ``category`` string.
The invalidity ratio and the reward pipeline group failures by this
category, so categories are part of the public contract.
"""


class RecadError(Exception):
    """Base class for categorized failures."""

    category = "error"

    def __init__(self, message, *, path=None):
        if path:
            message = f"{path}: {message}"
        super().__init__(message)
        self.path = path


class ScriptParseError(RecadError):
    """Lexical error, syntax error, or construct outside the grammar."""

    category = "parse"

    def __init__(self, message, *, line=None, col=None):
        if line is not None:
            message = f"line {line}, col {col}: {message}"
        super().__init__(message)
        self.line = line
        self.col = col


class JsonFormatError(RecadError):
    """Malformed or schema-violating model JSON."""

    category = "parse"


class UnsupportedFeatureError(RecadError):
    """Input uses a construct outside the supported interface."""

    category = "unsupported-feature"


class RangeError(RecadError):
    """A parameter falls outside its quantizable range."""

    category = "range"


class GeometryError(RecadError):
    """Degenerate or self-contradictory geometry (bad arc, crossing loops)."""

    category = "geometry"


class ValidationError(RecadError):
    """A constructed model violates a structural invariant."""

    category = "validation"

    def __init__(self, report):
        super().__init__("; ".join(str(v) for v in report.violations))
        self.report = report


class ResourceLimitError(RecadError):
    """Script execution exceeded a step, iteration, or curve budget."""

    category = "resource"


class ContractError(RecadError):
    """Script finished without binding ``cad_model`` to a model."""

    category = "contract"


class EvaluationError(RecadError):
    """Runtime failure while evaluating a script (bad types, math errors)."""

    category = "evaluation"


class EmptySolidError(RecadError):
    """The composed solid occupies no volume."""

    category = "empty-solid"


class ExtractionError(RecadError):
    """A solution text contains no script payload."""

    category = "extraction"
