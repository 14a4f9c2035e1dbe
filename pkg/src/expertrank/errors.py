"""Exception hierarchy shared by every module."""


class ExpertRankError(Exception):
    pass


class NotMonotone(ExpertRankError, ValueError):
    """No row permutation makes the matrix dominance-ordered."""


class OutOfRange(ExpertRankError, ValueError):
    """A mean lies outside [0, 1]."""


class BadIndex(ExpertRankError, IndexError):
    pass


class AllZero(ExpertRankError, ValueError):
    """Effective sparsity is undefined for an all-zero gap vector."""


class BadParams(ExpertRankError, ValueError):
    pass


class NotIdentifiable(ExpertRankError, ValueError):
    """Precision-0 procedures would never stop on tied experts without a budget cap."""


class BudgetExceeded(ExpertRankError):
    """Raised by an oracle when a request would overrun its query cap."""

    def __init__(self, limit: int, requested: int):
        super().__init__(f"query cap {limit} reached (request of {requested} refused)")
        self.limit = limit
        self.requested = requested


class ConfigError(ExpertRankError, ValueError):
    pass
