"""Exception types shared across the toolkit."""


class CreodriftError(Exception):
    """Base class for all toolkit errors."""


class EmptyCorpusError(CreodriftError):
    """No documents survived ingestion or filtering."""


class EmptyVocabularyError(CreodriftError):
    """No token met the minimum count threshold."""


class InvalidInputError(CreodriftError):
    """An argument violates a documented precondition."""


class BudgetExceededError(CreodriftError):
    """A simplex enumeration crossed the configured size budget."""

    def __init__(self, message, eps=None, count=None, budget=None):
        super().__init__(message)
        self.eps = eps
        self.count = count
        self.budget = budget


class UnsupportedRequestError(CreodriftError):
    """The request needs data that was not retained (e.g. generators)."""


class IncomparableDiagramsError(CreodriftError):
    """Two diagrams disagree on infinite-bar counts in the compared dimension."""

    def __init__(self, message, dim=None, count_a=None, count_b=None):
        super().__init__(message)
        self.dim = dim
        self.count_a = count_a
        self.count_b = count_b


class UndefinedMeanError(CreodriftError):
    """A group mean was requested over an empty pair set."""


class GraphGenerationError(CreodriftError):
    """A random graph spec could not be satisfied within the retry budget."""


class ManifestError(CreodriftError):
    """A run manifest failed validation."""


class StageInputError(CreodriftError):
    """A pipeline stage is missing a declared input artifact."""
