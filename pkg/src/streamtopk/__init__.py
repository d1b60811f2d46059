"""streamtopk: continuous top-k text query monitoring over sliding windows.

An in-memory engine that keeps, for every registered text query, the k
documents of the current window most similar to the query's weighted terms,
updating results incrementally on every arrival and expiration. Ships with
a full-rescan baseline (plain and k_max-buffered), near-duplicate
suppression, relevance-feedback boosting, document-partitioned
scatter-gather sharding, and a benchmark harness.
"""

from .baseline import BufferedRescanEngine, FullRescanEngine, KmaxBuffer, naive_top_k
from .bench import (BenchResult, MetricsRecord, VerificationError, build_engine,
                    run_benchmark, sweep)
from .coordinator import ShardSet, dispatch_event, merge_results
from .dedup import DedupConfig, check_duplicate, cosine
from .driver import Arrival, EventOutcome, Feedback, StreamDriver
from .engine import IncrementalTopKEngine, QueryState
from .feedback import FeedbackStore
from .genstream import QueryConfig, StreamConfig, generate_queries, generate_stream
from .index import (DocumentStore, InvertedList, TermIndex, ThresholdTree,
                    WindowPolicy, evict_expired, insert_document,
                    probe_thresholds, set_local_threshold)
from .model import (CompositionList, Document, Query, ScoredDoc, Term, Vocabulary,
                    load_stopwords, score, tokenize)

__version__ = "0.1.0"

__all__ = [
    "Arrival", "BenchResult", "BufferedRescanEngine", "CompositionList",
    "DedupConfig", "Document", "DocumentStore", "EventOutcome", "Feedback",
    "FeedbackStore", "FullRescanEngine", "IncrementalTopKEngine", "InvertedList",
    "KmaxBuffer", "MetricsRecord", "Query", "QueryConfig", "QueryState",
    "ScoredDoc", "ShardSet", "StreamConfig", "StreamDriver", "Term", "TermIndex",
    "ThresholdTree", "VerificationError", "Vocabulary", "WindowPolicy",
    "build_engine", "check_duplicate", "cosine", "dispatch_event",
    "evict_expired", "generate_queries", "generate_stream", "insert_document",
    "load_stopwords", "merge_results", "naive_top_k", "probe_thresholds",
    "run_benchmark", "score", "set_local_threshold", "sweep", "tokenize",
]
