"""Speeches to a pruned document-term matrix.

Pipeline per document: case-fold, tokenize to alphabetic tokens (numeric
tokens only with keep_numeric), drop short tokens, lemmatize, drop stop-words.
The vocabulary then prunes terms whose corpus-wide count falls below
min_count (default 3), and documents emptied by pruning are recorded as
dropped rather than kept as all-zero rows.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from .errors import DebatemapError

_WORD = re.compile(r"[^\W_]+", re.UNICODE)


class TextPrepError(DebatemapError):
    """Base class for preprocessing errors."""


class EmptyVocabulary(TextPrepError):
    """Nothing survived stop-word removal and min-count pruning."""


def identity_lemmatizer(token: str) -> str:
    """Default lemmatizer: keep the token as-is."""
    return token


@dataclass
class PrepConfig:
    """Tokenization and pruning settings."""

    stopwords: frozenset[str] = frozenset()
    min_count: int = 3
    min_token_len: int = 2
    keep_numeric: bool = False
    lemmatizer: Callable[[str], str] = identity_lemmatizer

    def __post_init__(self):
        if self.min_count < 1:
            raise TextPrepError(f"min_count must be >= 1, got {self.min_count}")
        self.stopwords = frozenset(self.stopwords)


@dataclass(frozen=True)
class Vocabulary:
    """Pruned term list ordered by (descending corpus count, then term)."""

    terms: tuple[str, ...]
    counts: tuple[int, ...]
    index: dict[str, int] = field(compare=False)

    def __len__(self) -> int:
        return len(self.terms)

    @staticmethod
    def from_counts(counts: dict[str, int]) -> "Vocabulary":
        ordered = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
        terms = tuple(term for term, _ in ordered)
        return Vocabulary(
            terms=terms,
            counts=tuple(count for _, count in ordered),
            index={term: i for i, term in enumerate(terms)},
        )


@dataclass(frozen=True)
class DocTermMatrix:
    """Sparse term counts per kept document, aligned with corpus order."""

    doc_ids: tuple[str, ...]
    vocabulary: Vocabulary
    rows: tuple[dict[int, int], ...]
    dropped_docs: tuple[str, ...]

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    @property
    def n_terms(self) -> int:
        return len(self.vocabulary)

    def total_tokens(self) -> int:
        return sum(sum(row.values()) for row in self.rows)


def load_stopwords(path: Path | str) -> frozenset[str]:
    """Load a one-term-per-line stop-word file."""
    terms = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        term = line.strip()
        if term and not term.startswith("#"):
            terms.add(term.casefold())
    return frozenset(terms)


def preprocess_speech(text: str, config: PrepConfig) -> list[str]:
    """Tokenize one speech into the surviving tokens, original order kept."""
    tokens = []
    for raw in _WORD.findall(text.casefold()):
        if not (raw.isalpha() or (config.keep_numeric and raw.isdigit())):
            continue
        if len(raw) < config.min_token_len:
            continue
        token = config.lemmatizer(raw)
        if token in config.stopwords:
            continue
        tokens.append(token)
    return tokens


def build_vocabulary(token_lists: Sequence[Sequence[str]], config: PrepConfig) -> Vocabulary:
    """Count terms corpus-wide and prune those seen fewer than min_count times."""
    if not token_lists:
        raise TextPrepError("no documents given")
    counts: dict[str, int] = {}
    for tokens in token_lists:
        for token in tokens:
            counts[token] = counts.get(token, 0) + 1
    kept = {term: count for term, count in counts.items() if count >= config.min_count}
    if not kept:
        raise EmptyVocabulary(
            f"no term occurs at least {config.min_count} times across {len(token_lists)} documents"
        )
    return Vocabulary.from_counts(kept)


def vectorize(
    doc_ids: Sequence[str],
    token_lists: Sequence[Sequence[str]],
    vocabulary: Vocabulary,
) -> DocTermMatrix:
    """Count surviving tokens per document; fully pruned documents are dropped."""
    if len(doc_ids) != len(token_lists):
        raise TextPrepError("doc_ids and token_lists lengths differ")
    kept_ids: list[str] = []
    rows: list[dict[int, int]] = []
    dropped: list[str] = []
    for doc_id, tokens in zip(doc_ids, token_lists):
        row: dict[int, int] = {}
        for token in tokens:
            column = vocabulary.index.get(token)
            if column is not None:
                row[column] = row.get(column, 0) + 1
        if row:
            kept_ids.append(doc_id)
            rows.append(row)
        else:
            dropped.append(doc_id)
    return DocTermMatrix(
        doc_ids=tuple(kept_ids),
        vocabulary=vocabulary,
        rows=tuple(rows),
        dropped_docs=tuple(dropped),
    )


def prepare_matrix(
    doc_ids: Sequence[str],
    texts: Sequence[str],
    config: PrepConfig,
) -> DocTermMatrix:
    """Full preprocessing pass: tokenize, build vocabulary, vectorize."""
    token_lists = [preprocess_speech(text, config) for text in texts]
    vocabulary = build_vocabulary(token_lists, config)
    return vectorize(doc_ids, token_lists, vocabulary)


def write_matrix(dtm: DocTermMatrix, path: Path | str, provenance: Optional[str] = None) -> None:
    """Write the sparse triplet CSV `doc_id,term,count` (comment lines start with #)."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        if provenance:
            handle.write(f"# provenance: {provenance}\n")
        writer = csv.writer(handle)
        writer.writerow(["doc_id", "term", "count"])
        for doc_id, row in zip(dtm.doc_ids, dtm.rows):
            for column in sorted(row):
                writer.writerow([doc_id, dtm.vocabulary.terms[column], row[column]])
        for doc_id in dtm.dropped_docs:
            writer.writerow([doc_id, "", 0])


def write_vocabulary(
    vocabulary: Vocabulary, path: Path | str, provenance: Optional[str] = None
) -> None:
    """Write the vocabulary sidecar: `term,count` in vocabulary order."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        if provenance:
            handle.write(f"# provenance: {provenance}\n")
        writer = csv.writer(handle)
        writer.writerow(["term", "count"])
        for term, count in zip(vocabulary.terms, vocabulary.counts):
            writer.writerow([term, count])


def read_vocabulary(path: Path | str) -> Vocabulary:
    with open(path, encoding="utf-8", newline="") as handle:
        lines = (line for line in handle if not line.startswith("#"))
        reader = csv.reader(lines)
        header = next(reader, None)
        if header != ["term", "count"]:
            raise TextPrepError(f"{path}: not a vocabulary sidecar")
        terms, counts = [], []
        for term, count in reader:
            terms.append(term)
            counts.append(int(count))
    return Vocabulary(
        terms=tuple(terms),
        counts=tuple(counts),
        index={term: i for i, term in enumerate(terms)},
    )


def read_matrix(path: Path | str, vocabulary: Vocabulary) -> DocTermMatrix:
    """Read a sparse triplet CSV; rows keep their order of first appearance."""
    doc_ids: list[str] = []
    rows: dict[str, dict[int, int]] = {}
    dropped: list[str] = []
    with open(path, encoding="utf-8", newline="") as handle:
        lines = (line for line in handle if not line.startswith("#"))
        reader = csv.reader(lines)
        header = next(reader, None)
        if header != ["doc_id", "term", "count"]:
            raise TextPrepError(f"{path}: not a document-term triplet file")
        for doc_id, term, count in reader:
            if term == "" and int(count) == 0:
                dropped.append(doc_id)
                continue
            if doc_id not in rows:
                doc_ids.append(doc_id)
                rows[doc_id] = {}
            rows[doc_id][vocabulary.index[term]] = int(count)
    return DocTermMatrix(
        doc_ids=tuple(doc_ids),
        vocabulary=vocabulary,
        rows=tuple(rows[doc_id] for doc_id in doc_ids),
        dropped_docs=tuple(dropped),
    )
