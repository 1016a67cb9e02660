"""In-process lexical index with BM25 ranking, plus an optional dense retriever hook."""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import httpx
import numpy as np

from polyroute.errors import BackendError, CorpusParse, ExecTimeout, Transport
from polyroute.execution.outcomes import Passage, Passages

K1 = 1.2
B = 0.75

_STRIP_RE = re.compile(r"[^\w\s]|_")
# scores equal up to float summation order count as ties, so doc_id decides them
_TIE_DIGITS = 9


def tokenize(text: str) -> list[str]:
    return _STRIP_RE.sub(" ", text.lower()).split()


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    text: str


@dataclass(frozen=True)
class DocumentIndex:
    docs: dict[str, Document]
    postings: dict[str, tuple[tuple[str, int], ...]]  # term -> ((doc_id, tf), ...) sorted by doc_id
    doc_lengths: dict[str, int]
    avg_doc_length: float
    size: int


def build_index_from_documents(documents: list[Document]) -> DocumentIndex:
    if not documents:
        raise CorpusParse("corpus is empty")
    docs: dict[str, Document] = {}
    for doc in documents:
        if doc.doc_id in docs:
            raise CorpusParse(f"duplicate doc_id {doc.doc_id!r}")
        docs[doc.doc_id] = doc

    lengths: dict[str, int] = {}
    postings: dict[str, list[tuple[str, int]]] = {}
    for doc_id in sorted(docs):
        doc = docs[doc_id]
        terms = tokenize(f"{doc.title} {doc.text}")
        lengths[doc_id] = len(terms)
        for term, tf in Counter(terms).items():
            postings.setdefault(term, []).append((doc_id, tf))
    avg = sum(lengths.values()) / len(lengths)
    return DocumentIndex(
        docs=docs,
        postings={t: tuple(p) for t, p in postings.items()},
        doc_lengths=lengths,
        avg_doc_length=avg,
        size=len(docs),
    )


def load_corpus(corpus_path: str | Path) -> list[Document]:
    path = Path(corpus_path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CorpusParse(f"cannot read corpus {path}: {exc}") from None
    documents = []
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            documents.append(Document(str(row["doc_id"]), str(row.get("title", "")), str(row["text"])))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CorpusParse(f"{path}:{n}: {exc}") from None
    return documents


def build_index(corpus_path: str | Path) -> DocumentIndex:
    return build_index_from_documents(load_corpus(corpus_path))


def bm25_scores(index: DocumentIndex, query_text: str) -> dict[str, float]:
    """Score every document sharing at least one term with the query."""
    scores: dict[str, float] = {}
    n = index.size
    for term, qtf in Counter(tokenize(query_text)).items():
        plist = index.postings.get(term)
        if not plist:
            continue
        df = len(plist)
        idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
        for doc_id, tf in plist:
            norm = K1 * (1.0 - B + B * index.doc_lengths[doc_id] / index.avg_doc_length)
            scores[doc_id] = scores.get(doc_id, 0.0) + qtf * idf * tf * (K1 + 1.0) / (tf + norm)
    return scores


def _rank_key(kv: tuple[str, float]) -> tuple[float, str]:
    return -round(kv[1], _TIE_DIGITS), kv[0]


def retrieve_documents(index: DocumentIndex, query_text: str, top_n: int = 10) -> Passages:
    scores = bm25_scores(index, query_text)
    ranked = sorted(scores.items(), key=_rank_key)[:top_n]
    return Passages(tuple(
        Passage(doc_id, score, index.docs[doc_id].text, index.docs[doc_id].title) for doc_id, score in ranked
    ))


class EmbeddingRetriever:
    """Cosine ranking over vectors from an external service.

    The service accepts ``POST {"texts": [...]}`` and answers ``{"vectors": [[...], ...]}``.
    Document vectors are fetched once and cached.
    """

    def __init__(self, url: str, index: DocumentIndex, *, timeout: float = 30.0, batch: int = 64,
                 client: httpx.Client | None = None):
        self.url = url
        self.index = index
        self.timeout = timeout
        self.batch = batch
        self._client = client or httpx.Client()
        self._doc_ids = sorted(index.docs)
        self._matrix: np.ndarray | None = None

    def _embed(self, texts: list[str]) -> np.ndarray:
        try:
            resp = self._client.post(self.url, json={"texts": texts}, timeout=self.timeout)
        except httpx.TimeoutException:
            raise ExecTimeout(f"embedding service did not answer within {self.timeout}s") from None
        except httpx.TransportError as exc:
            raise Transport(f"{self.url}: {exc}") from None
        if resp.status_code >= 400:
            raise BackendError(f"embedding service HTTP {resp.status_code}: {resp.text[:200]}")
        vectors = np.asarray(resp.json()["vectors"], dtype=float)
        if vectors.shape[0] != len(texts):
            raise BackendError("embedding service returned the wrong number of vectors")
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        return vectors / np.where(norms == 0, 1.0, norms)

    def _doc_matrix(self) -> np.ndarray:
        if self._matrix is None:
            texts = [f"{self.index.docs[d].title} {self.index.docs[d].text}".strip() for d in self._doc_ids]
            parts = [self._embed(texts[i : i + self.batch]) for i in range(0, len(texts), self.batch)]
            self._matrix = np.vstack(parts)
        return self._matrix

    def retrieve(self, query_text: str, top_n: int = 10) -> Passages:
        if not query_text.strip():
            return Passages(())
        sims = self._doc_matrix() @ self._embed([query_text])[0]
        ranked = sorted(zip(self._doc_ids, sims.tolist()), key=_rank_key)[:top_n]
        return Passages(tuple(
            Passage(d, float(s), self.index.docs[d].text, self.index.docs[d].title) for d, s in ranked
        ))
