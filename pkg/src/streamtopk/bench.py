"""Replay harness: per-event processing-time measurement, oracle spot
checks, and parameter sweeps.

Each stream record is one event; for count-based windows at capacity an
arrival also carries exactly one expiration, and both are timed together
with every query update they trigger. The first fraction of measured events
is treated as warm-up and excluded from summaries.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

from .baseline import BufferedRescanEngine, FullRescanEngine, naive_top_k
from .coordinator import ShardSet
from .dedup import DedupConfig
from .driver import Feedback, StreamDriver, StreamEvent
from .engine import IncrementalTopKEngine
from .feedback import FeedbackStore
from .genstream import QueryConfig, StreamConfig, generate_queries, generate_stream
from .index import DocumentStore, WindowPolicy
from .model import Query, Vocabulary

ENGINE_NAMES = ("ita", "naive", "naive-kmax")

SCORE_TOLERANCE = 1e-9


class VerificationError(AssertionError):
    def __init__(self, event: int, qid, expected, actual):
        super().__init__(
            f"event {event}: query {qid!r} diverged from the full-rescan oracle\n"
            f"  expected: {expected}\n  actual:   {actual}"
        )
        self.event = event
        self.qid = qid


@dataclass
class MetricsRecord:
    event: int
    kind: str
    micros: float
    queries_updated: int
    digest: int | None = None


@dataclass
class BenchResult:
    engine: str
    records: list[MetricsRecord]
    mean_micros: float
    p95_micros: float
    rescans: int = 0
    events_verified: int = 0
    final_results: dict = field(default_factory=dict)


def build_engine(name: str, store: DocumentStore, feedback: FeedbackStore,
                 workers: int = 1, k_mult: int = 2):
    if name not in ENGINE_NAMES:
        raise ValueError(f"unknown engine {name!r}; choose from {ENGINE_NAMES}")
    if workers > 1:
        if name != "ita":
            raise ValueError("--workers applies to the ita engine only")
        return ShardSet(store, workers, feedback)
    if name == "ita":
        return IncrementalTopKEngine(store, feedback)
    if name == "naive":
        return FullRescanEngine(store, feedback)
    return BufferedRescanEngine(store, feedback, k_mult=k_mult)


def results_match(expected, actual) -> bool:
    if len(expected) != len(actual):
        return False
    for (eid, es), (aid, ascore) in zip(expected, actual):
        if eid != aid or abs(es - ascore) > SCORE_TOLERANCE:
            return False
    return True


def run_benchmark(engine_name: str, events: list[StreamEvent], queries: list[Query],
                  policy: WindowPolicy, *, alpha: float = 0.2,
                  dedup: DedupConfig | None = None, workers: int = 1,
                  k_mult: int = 2, prefill: int = 0, verify_every: int = 0,
                  warmup_frac: float = 0.1,
                  collect_digests: bool = False) -> BenchResult:
    """Replay ``events`` through one engine, timing every post-prefill event.

    ``prefill`` events populate the window untimed. With ``verify_every`` set,
    every M-th measured event cross-checks all current results against a
    fresh full-window rescan and raises :class:`VerificationError` on any
    mismatch.
    """
    store = DocumentStore(policy)
    feedback = FeedbackStore(alpha)
    engine = build_engine(engine_name, store, feedback, workers, k_mult)
    driver = StreamDriver(store, engine, feedback, dedup)
    for q in queries:
        engine.register(q)

    for ev in events[:prefill]:
        driver.process(ev)
    if prefill and engine_name in ("naive", "naive-kmax"):
        engine.finalize_event()

    records: list[MetricsRecord] = []
    verified = 0
    perf = time.perf_counter
    for i, ev in enumerate(events[prefill:]):
        t0 = perf()
        outcome = driver.process(ev)
        changed = engine.finalize_event()
        elapsed = (perf() - t0) * 1e6
        changed |= outcome.changed
        kind = "feedback" if isinstance(ev, Feedback) else (
            "arrival+expire" if outcome.expired else "arrival")
        digest = None
        if collect_digests:
            digest = hash(tuple((q.id, tuple(engine.current_result(q.id))) for q in queries))
        records.append(MetricsRecord(i, kind, elapsed, len(changed), digest))
        if verify_every and i % verify_every == 0:
            verified += 1
            for q in queries:
                oracle = [(sd.doc_id, sd.score) for sd in naive_top_k(q, store, feedback)]
                actual = engine.current_result(q.id)
                if not results_match(oracle, actual):
                    raise VerificationError(i, q.id, oracle, actual)

    timed = records[int(len(records) * warmup_frac):]
    if timed:
        micros = sorted(r.micros for r in timed)
        mean = sum(micros) / len(micros)
        p95 = micros[min(len(micros) - 1, int(0.95 * (len(micros) - 1)))]
    else:
        mean = p95 = 0.0
    rescans = getattr(engine, "rescan_count", 0)
    final = {str(q.id): engine.current_result(q.id) for q in queries}
    return BenchResult(engine_name, records, mean, p95, rescans, verified, final)


@dataclass
class SweepPoint:
    value: int
    engine: str
    mean_micros: float
    p95_micros: float
    result: BenchResult | None = field(repr=False, default=None)


def sweep(param: str, values: list[int], *, stream: StreamConfig,
          query: QueryConfig, window_n: int, engines: list[str],
          measured_events: int, alpha: float = 0.2,
          dedup: DedupConfig | None = None, workers: int = 1,
          verify_every: int = 0) -> list[SweepPoint]:
    """One benchmark run per parameter value, shared seeds across engines.

    ``param`` is either ``n`` (query length) or ``N`` (window size); all
    other settings stay fixed. The first ``N`` stream events prefill the
    window, the next ``measured_events`` are timed.
    """
    if param not in ("n", "N"):
        raise ValueError("sweep parameter must be 'n' or 'N'")
    if not values or sorted(values) != list(values):
        raise ValueError("sweep values must be non-empty and ascending")
    points: list[SweepPoint] = []
    for value in values:
        n_window = value if param == "N" else window_n
        qcfg = replace(query, terms=value) if param == "n" else query
        scfg = replace(stream, n_docs=n_window + measured_events)
        vocab = Vocabulary()
        events = generate_stream(scfg, vocab)
        queries = generate_queries(qcfg, scfg.vocab_size, vocab)
        policy = WindowPolicy.count_based(n_window)
        for engine_name in engines:
            res = run_benchmark(
                engine_name, events, queries, policy, alpha=alpha, dedup=dedup,
                workers=workers if engine_name == "ita" else 1,
                prefill=n_window, verify_every=verify_every)
            points.append(SweepPoint(value, engine_name, res.mean_micros,
                                     res.p95_micros, res))
    return points
