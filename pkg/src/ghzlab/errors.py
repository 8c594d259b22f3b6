"""Exception hierarchy. Every error raised on purpose derives from GhzlabError."""


class GhzlabError(Exception):
    pass


class ModeCollisionError(GhzlabError):
    """Two states or operations claim the same spatial mode."""


class DegenerateStateError(GhzlabError):
    """An operation needs a state with nonzero norm."""


class NonUnitaryError(GhzlabError):
    pass


class TruncationError(GhzlabError):
    """Total photon number exceeds the configured truncation."""


class ValidationError(GhzlabError, ValueError):
    """Bad parameters, malformed input files, inconsistent tables."""


class SettingMismatchError(ValidationError):
    """Count tables do not carry the measurement settings an estimator needs."""


class IncompleteFixtureError(GhzlabError):
    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = tuple(missing)
