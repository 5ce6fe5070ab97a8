"""Exception types shared across the package."""


class TakagiLabError(Exception):
    """Base class for guard and contract violations raised by this package."""


class LevelOverflowError(TakagiLabError):
    """A dyadic level exceeds the configured maximum."""


class GuardExceededError(TakagiLabError):
    """A size guard (moment order, partition size, ...) was exceeded."""


class MissingLevelError(TakagiLabError):
    """An explicit coefficient source was queried beyond its supplied levels."""
