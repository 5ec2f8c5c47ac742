"""Aggregate a fitted model over time and speakers.

Produces the yearly dominant-topic share series, per-year rank tables,
prominence queries over theta, and the per-affiliation topic weights that
feed the network builder. All aggregation runs over included speeches that
survived preprocessing (i.e. exactly the model's documents).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .corpus import Corpus, Speech
from .errors import DebatemapError
from .topicmodel import TopicModel, TopicOutOfRange


class LandscapeError(DebatemapError):
    """Base class for aggregation errors."""


class CorpusModelMismatch(LandscapeError):
    """Model documents are not all present in the corpus."""


class YearNotInSeries(LandscapeError):
    """Requested year has no documents in the series."""


@dataclass(frozen=True)
class LandscapeSeries:
    """Per-year dominant-topic shares; years with zero documents are omitted."""

    k: int
    years: tuple[int, ...]
    doc_counts: tuple[int, ...]
    shares: np.ndarray  # (len(years), k), each row sums to 1

    def share(self, year: int, topic: int) -> float:
        try:
            row = self.years.index(year)
        except ValueError:
            raise YearNotInSeries(f"no documents in year {year}") from None
        return float(self.shares[row, topic])


@dataclass(frozen=True)
class RankTable:
    """Per-year topics by descending share, cut once cumulative mass reaches the threshold."""

    threshold: float
    rows: Mapping[int, tuple[tuple[int, float], ...]]  # year -> ((topic, share), ...)


@dataclass(frozen=True)
class SpeakerTopicWeights:
    """Summed theta mass per affiliation and topic."""

    k: int
    weights: Mapping[str, np.ndarray]  # affiliation -> length-k non-negative vector

    def weight(self, affiliation: str, topic: int) -> float:
        return float(self.weights[affiliation][topic])


def dominant_topic(theta_row: Sequence[float]) -> int:
    """Argmax of a theta row; ties go to the lowest topic index."""
    return int(np.argmax(theta_row))


def _speeches_by_id(corpus: Corpus) -> dict[str, Speech]:
    return {speech.id: speech for speech in corpus.speeches}


def yearly_shares(corpus: Corpus, model: TopicModel) -> LandscapeSeries:
    """Fraction of each year's documents whose dominant topic is t.

    Both numerator and denominator range over the model's documents, so
    excluded speeches and speeches emptied by preprocessing never count.
    """
    lookup = _speeches_by_id(corpus)
    tallies: dict[int, np.ndarray] = {}
    for row, doc_id in enumerate(model.doc_ids):
        speech = lookup.get(doc_id)
        if speech is None:
            raise CorpusModelMismatch(f"model document {doc_id!r} not found in corpus")
        tally = tallies.setdefault(speech.year, np.zeros(model.k, dtype=np.int64))
        tally[dominant_topic(model.theta[row])] += 1

    years = tuple(sorted(tallies))
    doc_counts = tuple(int(tallies[year].sum()) for year in years)
    shares = np.zeros((len(years), model.k), dtype=np.float64)
    for i, year in enumerate(years):
        shares[i] = tallies[year] / doc_counts[i]
    return LandscapeSeries(k=model.k, years=years, doc_counts=doc_counts, shares=shares)


def rank_shares(shares: Sequence[float], cum_threshold: float = 0.5) -> list[tuple[int, float]]:
    """Topics by descending share (ties to lower index), until cumulative >= threshold."""
    order = sorted(range(len(shares)), key=lambda t: (-shares[t], t))
    rows: list[tuple[int, float]] = []
    cumulative = 0.0
    for topic in order:
        rows.append((topic, float(shares[topic])))
        cumulative += shares[topic]
        if cumulative >= cum_threshold:
            break
    return rows


def rank_table(series: LandscapeSeries, cum_threshold: float = 0.5) -> RankTable:
    rows = {
        year: tuple(rank_shares(series.shares[i], cum_threshold))
        for i, year in enumerate(series.years)
    }
    return RankTable(threshold=cum_threshold, rows=rows)


def prominent_speeches(
    model: TopicModel, topic: int, threshold: float = 0.20
) -> list[tuple[str, float]]:
    """(speech id, theta) pairs with theta strictly above the threshold.

    Sorted by descending theta, then by id for equal scores.
    """
    if not 0 <= topic < model.k:
        raise TopicOutOfRange(f"topic {topic} not in [0, {model.k})")
    hits = [
        (doc_id, float(model.theta[row, topic]))
        for row, doc_id in enumerate(model.doc_ids)
        if model.theta[row, topic] > threshold
    ]
    hits.sort(key=lambda pair: (-pair[1], pair[0]))
    return hits


def speaker_topic_weights(corpus: Corpus, model: TopicModel) -> SpeakerTopicWeights:
    """Sum each document's theta row into its affiliation's weight vector."""
    lookup = _speeches_by_id(corpus)
    weights: dict[str, np.ndarray] = {}
    for row, doc_id in enumerate(model.doc_ids):
        speech = lookup.get(doc_id)
        if speech is None:
            raise CorpusModelMismatch(f"model document {doc_id!r} not found in corpus")
        if not speech.affiliation:
            raise CorpusModelMismatch(f"model document {doc_id!r} has no affiliation")
        vector = weights.setdefault(speech.affiliation, np.zeros(model.k, dtype=np.float64))
        vector += model.theta[row]
    return SpeakerTopicWeights(k=model.k, weights=weights)


def landscape_payload(
    series: LandscapeSeries,
    table: RankTable,
    topic_keywords: Optional[Mapping[int, Sequence[str]]] = None,
) -> dict:
    """JSON-ready landscape export consumed by the bundle and the explorer."""
    return {
        "k": series.k,
        "topics": [f"T{t}" for t in range(series.k)],
        "years": list(series.years),
        "doc_counts": list(series.doc_counts),
        "shares": [[float(v) for v in row] for row in series.shares],
        "rank_table": {
            str(year): [{"topic": f"T{t}", "share": share} for t, share in rows]
            for year, rows in sorted(table.rows.items())
        },
        "rank_threshold": table.threshold,
        "topic_keywords": {
            f"T{t}": list(words) for t, words in sorted((topic_keywords or {}).items())
        },
    }


def write_landscape_json(payload: dict, path: Path | str) -> None:
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, indent=1, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def write_landscape_csv(series: LandscapeSeries, path: Path | str) -> None:
    """CSV mirror: one row per year, one share column per topic."""
    lines = ["year,doc_count," + ",".join(f"T{t}" for t in range(series.k))]
    for i, year in enumerate(series.years):
        shares = ",".join(repr(float(v)) for v in series.shares[i])
        lines.append(f"{year},{series.doc_counts[i]},{shares}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
