"""Sliding-window document store, impact-ordered inverted lists, and
per-term threshold registries.

Inverted lists keep (weight desc, doc id desc) order under logarithmic-time
insertion and deletion; internally each entry is stored as the negated key
``(-weight, -doc_id)`` so plain ``bisect`` gives the right order. Threshold
trees are sorted parallel arrays probed with ``bisect`` as well.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right, insort
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator

from .model import Document, QueryId

COUNT_BASED = "count"
TIME_BASED = "time"

_NEG_INF = float("-inf")


@dataclass(frozen=True)
class WindowPolicy:
    """Window validity rule: the N most recent documents (count) or the
    documents younger than N ticks (time)."""

    kind: str
    capacity: int

    def __post_init__(self) -> None:
        if self.kind not in (COUNT_BASED, TIME_BASED):
            raise ValueError(f"unknown window kind {self.kind!r}")
        if self.capacity < 1:
            raise ValueError("window capacity must be >= 1")

    @classmethod
    def count_based(cls, n: int) -> "WindowPolicy":
        return cls(COUNT_BASED, n)

    @classmethod
    def time_based(cls, n: int) -> "WindowPolicy":
        return cls(TIME_BASED, n)


class DocumentStore:
    """FIFO store of the currently valid documents.

    Documents enter at the tail in strictly increasing id order and leave
    from the head when the window policy expires them.
    """

    def __init__(self, policy: WindowPolicy):
        self.policy = policy
        self._docs: deque[Document] = deque()
        self._by_id: dict[int, Document] = {}

    def insert(self, doc: Document) -> None:
        if self._docs and doc.id <= self._docs[-1].id:
            raise ValueError(
                f"out-of-order document id {doc.id} after {self._docs[-1].id}"
            )
        self._docs.append(doc)
        self._by_id[doc.id] = doc

    def evict_due(self, now: int) -> list[Document]:
        """Remove and return all head documents the policy invalidates.

        For count-based windows the head is trimmed while the store exceeds
        capacity; for time-based windows while the head's age reaches it.
        Returned documents are in ascending id order.
        """
        expired: list[Document] = []
        docs = self._docs
        if self.policy.kind == COUNT_BASED:
            cap = self.policy.capacity
            while len(docs) > cap:
                expired.append(docs.popleft())
        else:
            cap = self.policy.capacity
            while docs and now - docs[0].arrival_time >= cap:
                expired.append(docs.popleft())
        for d in expired:
            del self._by_id[d.id]
        return expired

    def get(self, doc_id: int) -> Document | None:
        return self._by_id.get(doc_id)

    def documents(self) -> Iterator[Document]:
        return iter(self._docs)

    def __len__(self) -> int:
        return len(self._docs)

    def __contains__(self, doc_id: int) -> bool:
        return doc_id in self._by_id


class InvertedList:
    """Impact entries for one term, ordered by (weight desc, doc id desc)."""

    __slots__ = ("_keys",)

    def __init__(self) -> None:
        self._keys: list[tuple[float, float]] = []  # (-weight, -doc_id)

    def insert(self, doc_id: int, weight: float) -> None:
        if weight <= 0:
            raise ValueError("impact weights must be positive")
        insort(self._keys, (-weight, -doc_id))

    def remove(self, doc_id: int, weight: float) -> None:
        key = (-weight, -doc_id)
        pos = bisect_left(self._keys, key)
        if pos == len(self._keys) or self._keys[pos] != key:
            raise KeyError(f"no impact entry ({doc_id}, {weight}) in list")
        del self._keys[pos]

    def __len__(self) -> int:
        return len(self._keys)

    def __bool__(self) -> bool:
        return bool(self._keys)

    def weight_at(self, pos: int) -> float:
        return -self._keys[pos][0]

    def doc_at(self, pos: int) -> int:
        return int(-self._keys[pos][1])

    def run_end(self, pos: int) -> int:
        """Index one past the last entry sharing ``pos``'s weight."""
        w = self._keys[pos][0]
        return bisect_right(self._keys, (w, 0.0), lo=pos)

    def pos_weight_below(self, weight: float) -> int:
        """First position whose weight is <= ``weight`` (start of the resume
        region for a stored threshold)."""
        return bisect_left(self._keys, (-weight, _NEG_INF))

    def next_weight_above(self, weight: float) -> float | None:
        """Smallest entry weight strictly greater than ``weight``, if any."""
        pos = bisect_left(self._keys, (-weight, _NEG_INF))
        if pos == 0:
            return None
        return -self._keys[pos - 1][0]

    def entries(self) -> list[tuple[int, float]]:
        """(doc_id, weight) pairs in list order; mainly for tests."""
        return [(int(-nid), -nw) for nw, nid in self._keys]


class ThresholdTree:
    """Per-term registry of (local threshold, query id), ordered by threshold.

    Probing at weight w returns every query whose threshold is <= w, walking
    from the low end. Query ids can be of mixed types, so thresholds and ids
    live in parallel arrays and bisect runs on the thresholds only.
    """

    __slots__ = ("_thresholds", "_qids")

    def __init__(self) -> None:
        self._thresholds: list[float] = []
        self._qids: list[QueryId] = []

    def _locate(self, qid: QueryId, threshold: float) -> int:
        pos = bisect_left(self._thresholds, threshold)
        while pos < len(self._thresholds) and self._thresholds[pos] == threshold:
            if self._qids[pos] == qid:
                return pos
            pos += 1
        raise KeyError(f"query {qid!r} has no threshold entry at {threshold}")

    def insert(self, qid: QueryId, threshold: float) -> None:
        pos = bisect_right(self._thresholds, threshold)
        self._thresholds.insert(pos, threshold)
        self._qids.insert(pos, qid)

    def update(self, qid: QueryId, old: float, new: float) -> None:
        if old == new:
            return
        pos = self._locate(qid, old)
        del self._thresholds[pos]
        del self._qids[pos]
        self.insert(qid, new)

    def remove(self, qid: QueryId, threshold: float) -> None:
        pos = self._locate(qid, threshold)
        del self._thresholds[pos]
        del self._qids[pos]

    def probe(self, weight: float) -> list[QueryId]:
        """Query ids whose local threshold is <= ``weight`` (inclusive)."""
        pos = bisect_right(self._thresholds, weight)
        return self._qids[:pos]

    def entries(self) -> list[tuple[float, QueryId]]:
        return list(zip(self._thresholds, self._qids))

    def __len__(self) -> int:
        return len(self._thresholds)

    def __bool__(self) -> bool:
        return bool(self._thresholds)


class _TermEntry:
    __slots__ = ("postings", "tree")

    def __init__(self) -> None:
        self.postings = InvertedList()
        self.tree = ThresholdTree()


class TermIndex:
    """The term dictionary: term id -> (inverted list, threshold tree).

    A term is present only while some windowed non-duplicate document or
    registered query still refers to it; entries that go empty on both sides
    are dropped to bound memory.
    """

    def __init__(self) -> None:
        self._terms: dict[int, _TermEntry] = {}

    def entry(self, tid: int) -> _TermEntry | None:
        return self._terms.get(tid)

    def ensure(self, tid: int) -> _TermEntry:
        ent = self._terms.get(tid)
        if ent is None:
            ent = self._terms[tid] = _TermEntry()
        return ent

    def gc(self, tid: int) -> None:
        ent = self._terms.get(tid)
        if ent is not None and not ent.postings and not ent.tree:
            del self._terms[tid]

    def list_for(self, tid: int) -> InvertedList | None:
        ent = self._terms.get(tid)
        return ent.postings if ent is not None else None

    def add_document(self, doc: Document, factor: float = 1.0) -> None:
        """Index one impact entry per composition term. Duplicates get none."""
        if doc.is_duplicate:
            return
        for tid, w in doc.composition.pairs:
            self.ensure(tid).postings.insert(doc.id, w * factor)

    def remove_document(self, doc: Document, factor: float = 1.0) -> None:
        if doc.is_duplicate:
            return
        for tid, w in doc.composition.pairs:
            ent = self._terms[tid]
            ent.postings.remove(doc.id, w * factor)
            self.gc(tid)

    def reindex_document(self, doc: Document, old_factor: float, new_factor: float) -> None:
        """Rewrite a document's impact entries after its boost factor changed."""
        if doc.is_duplicate or old_factor == new_factor:
            return
        for tid, w in doc.composition.pairs:
            postings = self._terms[tid].postings
            postings.remove(doc.id, w * old_factor)
            postings.insert(doc.id, w * new_factor)

    def terms(self) -> Iterable[int]:
        return self._terms.keys()

    def __len__(self) -> int:
        return len(self._terms)

    def __contains__(self, tid: int) -> bool:
        return tid in self._terms


def insert_document(store: DocumentStore, index: TermIndex, doc: Document,
                    factor: float = 1.0) -> None:
    """Append a document to the window and index it (duplicates stay unindexed)."""
    store.insert(doc)
    index.add_document(doc, factor)


def evict_expired(store: DocumentStore, index: TermIndex, now: int,
                  factors: dict[int, float] | None = None) -> list[Document]:
    """Expire due documents from the window and drop their impact entries.

    ``factors`` supplies per-document boost multipliers when feedback has
    rewritten indexed weights.
    """
    expired = store.evict_due(now)
    for doc in expired:
        f = factors.get(doc.id, 1.0) if factors else 1.0
        index.remove_document(doc, f)
    return expired


def probe_thresholds(tree: ThresholdTree, weight: float) -> set[QueryId]:
    """Set of query ids whose local threshold for this term is <= ``weight``."""
    if weight <= 0:
        raise ValueError("probe weight must be positive")
    return set(tree.probe(weight))


def set_local_threshold(tree: ThresholdTree, qid: QueryId, old: float, new: float) -> None:
    """Replace a query's registered local threshold, keeping tree order."""
    tree.update(qid, old, new)
