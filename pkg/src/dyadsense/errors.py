"""Exception hierarchy shared across the toolkit."""


class DyadSenseError(Exception):
    """Base class for toolkit errors."""


class ConfigError(DyadSenseError, ValueError):
    """Invalid configuration or mismatched inputs."""


class ModelError(DyadSenseError):
    """Model/feature dimension mismatch or invalid score."""


class TrainingError(DyadSenseError):
    """Training data cannot produce a model (e.g. a single class)."""


class ParseError(DyadSenseError, ValueError):
    """Malformed input file."""


class StreamError(DyadSenseError):
    """Out-of-order event or sample stream."""


class SchemaError(ModelError):
    """Feature set does not match the schema a model was trained on."""
