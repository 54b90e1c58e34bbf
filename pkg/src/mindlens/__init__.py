"""mindlens: annotate social-media corpora for mental-health relevance,
disorder labels, severity, and therapy/behavior recommendations; evaluate
classifier predictions; and emit distribution analytics."""

from .corpus import CorpusFilter, IngestStats, Post, SampleSpec, ingest, sample
from .lexicon import (
    DISORDERS,
    DisorderLabel,
    Lexicon,
    MatchResult,
    annotate_dictionary,
    load_lexicon,
)
from .tasks import (
    BinaryVerdict,
    PromptTemplate,
    SeverityLevel,
    TherapyCode,
    TherapyRecommendation,
    load_pack,
    parse_behavior,
    parse_binary,
    parse_disorders,
    parse_severity,
    parse_therapies,
    render,
)
from .util import DataError, MindlensError, ValidationError

__version__ = "0.1.0"

__all__ = [
    "BinaryVerdict",
    "CorpusFilter",
    "DISORDERS",
    "DataError",
    "DisorderLabel",
    "IngestStats",
    "Lexicon",
    "MatchResult",
    "MindlensError",
    "Post",
    "PromptTemplate",
    "SampleSpec",
    "SeverityLevel",
    "TherapyCode",
    "TherapyRecommendation",
    "ValidationError",
    "annotate_dictionary",
    "ingest",
    "load_lexicon",
    "load_pack",
    "parse_behavior",
    "parse_binary",
    "parse_disorders",
    "parse_severity",
    "parse_therapies",
    "render",
    "sample",
]
