"""Exception types shared across the package."""


class BewError(Exception):
    """Base class for every error raised by this package."""


class ParseError(BewError):
    """The snapshot bytes could not be decoded as text."""


class PathError(BewError, LookupError):
    """A node path does not resolve inside a tree."""


class EmptyTemplate(BewError):
    """No title immutables were found for an aggregator."""


class EmptyText(BewError, ValueError):
    """Text to embed is empty after normalization."""


class DimensionMismatch(BewError, ValueError):
    """Two embeddings come from different providers or have different lengths."""


class RemoteUnavailable(BewError):
    """The remote embedding service could not be reached or answered badly."""


class NoTemplates(BewError):
    """No aggregator in the corpus has both a template and sample pages."""


class NoEntityPages(BewError):
    """None of the selected aggregators holds a page for the entity."""


class FetchError(BewError):
    """A single fetch job failed."""

    def __init__(self, job, message: str):
        super().__init__(f"{job.url}: {message}")
        self.job = job
        self.message = message
