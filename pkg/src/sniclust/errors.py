"""Exception hierarchy shared across the package."""


class SniclustError(Exception):
    """Base class for all errors raised by this package."""


class IoError(SniclustError):
    """Input file missing or unreadable."""


class FormatError(SniclustError):
    """Malformed input row; message carries the 1-based row number."""


class EmptyDatasetError(SniclustError):
    """Input contained zero usable rows."""


class InvalidEpsilonError(SniclustError):
    """DBSCAN epsilon outside the open interval (0, 1)."""


class UnknownLabelError(SniclustError):
    """Cluster label not present in a clustering."""


class ShapeMismatchError(SniclustError):
    """Clusterings or matrices do not cover the same points."""


class EmptyWeightsError(SniclustError):
    """Weight matrix has no domain clusters to evaluate."""


class InvalidScenarioError(SniclustError):
    """Synthetic scenario violates its own consistency rules."""


class ConfigError(SniclustError):
    """Bad run configuration (CLI exit code 2)."""
