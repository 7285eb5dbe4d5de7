"""Exception hierarchy shared across the pipeline.

Every stage-level failure that should quarantine a record (rather than
abort a batch) derives from RecordError so orchestration code can catch
one type.
"""


class PipelineError(Exception):
    """Base for all errors raised by this package."""


class RecordError(PipelineError):
    """A per-record failure; the record is quarantined, the batch continues."""


# seed corpus -----------------------------------------------------------

class EmptyCorpus(PipelineError):
    """Corpus file contained zero valid records."""


class DocumentTooShort(RecordError):
    """Document has fewer lines than the minimum snippet window."""


# prompt templates ------------------------------------------------------

class UnknownKind(PipelineError):
    """Template kind is not one of the supported kinds."""


class MissingPlaceholder(PipelineError):
    def __init__(self, name: str):
        super().__init__(f"missing required placeholder: {name}")
        self.name = name


class ParseFailure(RecordError):
    """Model output did not match the documented structured format."""

    def __init__(self, reason: str, excerpt: str = ""):
        snippet = excerpt.strip().replace("\n", " ")[:160]
        super().__init__(f"{reason}" + (f" | excerpt: {snippet!r}" if snippet else ""))
        self.reason = reason
        self.excerpt = excerpt


class OutOfRange(RecordError):
    """Parsed value fell outside its documented bounds."""


# gateway ---------------------------------------------------------------

class GatewayError(RecordError):
    """Base for completion-service failures."""


class TransportError(GatewayError):
    """Connection or timeout failure after exhausting retries."""


class RateLimited(GatewayError):
    """Throttled and retry budget exhausted."""


class CassetteMiss(GatewayError):
    def __init__(self, digest: str):
        super().__init__(f"no cassette entry for digest {digest}")
        self.digest = digest


class MalformedResponse(GatewayError):
    """Service reply lacked text content."""


# keyword graph ---------------------------------------------------------

class UnknownNode(RecordError):
    """Triple endpoint does not resolve to a known node."""


class IllegalRelation(RecordError):
    """Relation not permitted for the (subject kind, object kind) pair."""


# scoring ---------------------------------------------------------------

class ScoringIncomplete(RecordError):
    """Fewer than the required number of parseable assessments."""


class EmptyInput(PipelineError):
    """Statistics requested over an empty sequence."""


# static gate -----------------------------------------------------------

class AnalyzerMissing(PipelineError):
    def __init__(self, tool: str):
        super().__init__(f"analyzer not found on PATH: {tool}")
        self.tool = tool


class AnalyzerCrash(PipelineError):
    """Analyzer exited abnormally without parseable output."""


class OutputParseFailure(PipelineError):
    def __init__(self, reason: str, raw: str = ""):
        super().__init__(f"{reason} | raw: {raw[:160]!r}")
        self.reason = reason
        self.raw = raw
