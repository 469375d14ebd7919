"""Error hierarchy with stable machine-readable codes.

Every failure mode the library promises to clients carries a short
upper-case code; the CLI prints these codes in its one-line diagnostics
and maps them onto exit statuses.
"""


class PredlabError(Exception):
    """Base class for all predlab errors."""

    code = "ERROR"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class StreamExhausted(PredlabError):
    """A file-backed stream was read past its declared total bits."""

    code = "STREAM_EXHAUSTED"


class UnknownRule(PredlabError):
    """Rule identifier not in the rule-stream catalogue."""

    code = "UNKNOWN_RULE"


class PrecisionRange(PredlabError):
    """Digit position beyond the precision-safe range of the extraction series."""

    code = "PRECISION_RANGE"


class PredictorNontotal(PredlabError):
    """Predictor exceeded its fuel budget; treated as a non-total procedure."""

    code = "PREDICTOR_NONTOTAL"


class ScopeViolation(PredlabError):
    """Extractor attempted a read outside its declared visibility scope."""

    code = "SCOPE_VIOLATION"


class ScopeTooWide(PredlabError):
    """Adversarial construction requires the extractor to be precision-limited."""

    code = "SCOPE_TOO_WIDE"


class PolicyViolation(PredlabError):
    """Extractor-set member does not satisfy the set's policy predicate."""

    code = "POLICY_VIOLATION"


class EnumerationTooLarge(PredlabError):
    """Requested automaton enumeration exceeds the supported table space."""

    code = "ENUMERATION_TOO_LARGE"


class NotNormalised(PredlabError):
    """State amplitudes do not form a unit vector within tolerance."""

    code = "NOT_NORMALISED"


class InsufficientLength(PredlabError):
    """Sequence too short for the requested block statistics."""

    code = "INSUFFICIENT_LENGTH"


class ConfigError(PredlabError):
    """Scenario configuration is malformed or references unknown ids."""

    code = "CONFIG"
