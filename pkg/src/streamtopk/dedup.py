"""Near-duplicate suppression for arriving documents.

An arrival is compared against windowed documents that share one of its
heaviest terms; if the best cosine similarity reaches the configured
threshold the arrival is flagged as a duplicate of that document and never
indexed, which keeps it out of every result list. A threshold above 1
disables detection entirely.
"""

from __future__ import annotations

from dataclasses import dataclass

from .index import DocumentStore, TermIndex
from .model import CompositionList, Document


@dataclass(frozen=True)
class DedupConfig:
    similarity_threshold: float = 0.95
    candidate_terms: int = 5

    def __post_init__(self) -> None:
        if self.similarity_threshold <= 0:
            raise ValueError("similarity threshold must be positive")
        if self.candidate_terms < 1:
            raise ValueError("candidate_terms must be >= 1")

    @property
    def enabled(self) -> bool:
        return self.similarity_threshold <= 1.0


def cosine(a: CompositionList, b: CompositionList) -> float:
    """Cosine similarity of two weight vectors over their term union."""
    if not a.pairs or not b.pairs:
        raise ValueError("cosine of an empty composition is undefined")
    if len(a.pairs) > len(b.pairs):
        a, b = b, a
    bw = b.weights
    dot = 0.0
    for tid, w in a.pairs:
        w2 = bw.get(tid)
        if w2 is not None:
            dot += w * w2
    if dot == 0.0:
        return 0.0
    return dot / (a.norm * b.norm)


def check_duplicate(doc: Document, store: DocumentStore,
                    index: TermIndex | None,
                    config: DedupConfig) -> int | None:
    """Return the id of the windowed document ``doc`` duplicates, if any.

    Candidates come from the inverted lists of the arrival's
    ``candidate_terms`` highest-weight terms; with no ``index`` available the
    whole window is scanned instead. The best candidate at or above the
    threshold wins, ties going to the newest document.
    """
    if not config.enabled or not doc.composition.pairs:
        return None

    best_cos = 0.0
    best_id: int | None = None

    if index is None:
        for cand in store.documents():
            if cand.is_duplicate or cand.id == doc.id:
                continue
            c = cosine(doc.composition, cand.composition)
            if c > best_cos or (c == best_cos and best_id is not None and cand.id > best_id):
                best_cos, best_id = c, cand.id
    else:
        top_terms = sorted(doc.composition.pairs, key=lambda p: (-p[1], p[0]))
        seen: set[int] = set()
        for tid, _w in top_terms[: config.candidate_terms]:
            postings = index.list_for(tid)
            if postings is None:
                continue
            for cand_id, _cw in postings.entries():
                if cand_id in seen or cand_id == doc.id:
                    continue
                seen.add(cand_id)
                cand = store.get(cand_id)
                if cand is None:
                    continue
                c = cosine(doc.composition, cand.composition)
                if c > best_cos or (c == best_cos and best_id is not None and cand_id > best_id):
                    best_cos, best_id = c, cand_id

    if best_id is not None and best_cos >= config.similarity_threshold:
        return best_id
    return None
