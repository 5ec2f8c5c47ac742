"""Topic model fit by collapsed Gibbs sampling.

The sampler resamples one token-topic assignment at a time from the full
conditional P(z=t | rest) proportional to (n_dt + alpha) * (n_tw + beta) /
(n_t + V*beta), then reads point estimates off the final state:

    theta[d, t] = (n_dt + alpha) / (n_d + k*alpha)
    phi[t, w]   = (n_tw + beta) / (n_t + V*beta)

Tokens are laid out in a fixed global order (documents sorted by id, terms
within a document by vocabulary index) and the random stream is consumed in
that order, so a run is bitwise reproducible from its seed and invariant to
how the matrix rows happened to be ordered.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np
from numba import njit

from .errors import DebatemapError
from .textprep import DocTermMatrix

DEFAULT_SEED = 2017


class TopicModelError(DebatemapError):
    """Base class for topic-model errors."""


class InvalidConfig(TopicModelError):
    """LDA configuration violates its invariants."""


class EmptyMatrix(TopicModelError):
    """The document-term matrix has no rows or no tokens."""


class TopicOutOfRange(TopicModelError):
    """Requested topic index is outside [0, k)."""


class ModelMatrixMismatch(TopicModelError):
    """Model and matrix do not describe the same documents/vocabulary."""


@dataclass(frozen=True)
class LdaConfig:
    """Sampler settings; alpha defaults to 50/k when not given."""

    k: int
    alpha: Optional[float] = None
    beta: float = 0.01
    iterations: int = 1000
    burn_in: int = 200
    seed: int = DEFAULT_SEED
    average_last_m: int = 0

    def resolved_alpha(self) -> float:
        return 50.0 / self.k if self.alpha is None else self.alpha

    def validate(self) -> None:
        if self.k < 1:
            raise InvalidConfig(f"k must be >= 1, got {self.k}")
        if self.resolved_alpha() <= 0 or self.beta <= 0:
            raise InvalidConfig("alpha and beta must be > 0")
        if not 0 <= self.burn_in < self.iterations:
            raise InvalidConfig(
                f"burn_in ({self.burn_in}) must lie in [0, iterations={self.iterations})"
            )
        if self.average_last_m < 0 or self.average_last_m > self.iterations - self.burn_in:
            raise InvalidConfig("average_last_m must lie in [0, iterations - burn_in]")


@dataclass(frozen=True)
class TopicModel:
    """Fitted state: per-token assignments plus theta/phi point estimates."""

    config: LdaConfig
    doc_ids: tuple[str, ...]
    vocabulary: tuple[str, ...]
    theta: np.ndarray  # (n_docs, k), rows in doc_ids order
    phi: np.ndarray  # (k, n_terms)
    z: np.ndarray  # int32 per token, global token order (sorted doc id, term index)

    @property
    def k(self) -> int:
        return self.config.k

    def theta_row(self, doc_id: str) -> np.ndarray:
        return self.theta[self.doc_ids.index(doc_id)]


_SM64_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM64_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_SM64_MIX2 = np.uint64(0x94D049BB133111EB)
_DOUBLE_UNIT = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True, nogil=True)
def _next_uniform(state):
    """splitmix64 step; uniform double in [0, 1). state is a 1-element uint64 array."""
    s = state[0] + _SM64_GAMMA
    state[0] = s
    z = (s ^ (s >> np.uint64(30))) * _SM64_MIX1
    z = (z ^ (z >> np.uint64(27))) * _SM64_MIX2
    z = z ^ (z >> np.uint64(31))
    return float(z >> np.uint64(11)) * _DOUBLE_UNIT


@njit(cache=True, nogil=True)
def _gibbs(doc_of, term_of, n_docs, n_terms, k, alpha, beta, iterations, avg_last, seed):
    n_tokens = doc_of.shape[0]
    state = np.empty(1, dtype=np.uint64)
    state[0] = seed

    z = np.empty(n_tokens, dtype=np.int32)
    n_dt = np.zeros((n_docs, k), dtype=np.int64)
    n_tw = np.zeros((k, n_terms), dtype=np.int64)
    n_t = np.zeros(k, dtype=np.int64)

    for i in range(n_tokens):
        t = int(_next_uniform(state) * k)
        if t >= k:
            t = k - 1
        z[i] = t
        n_dt[doc_of[i], t] += 1
        n_tw[t, term_of[i]] += 1
        n_t[t] += 1

    cumulative = np.empty(k, dtype=np.float64)
    vbeta = n_terms * beta
    theta_sum = np.zeros((n_docs, k), dtype=np.float64)
    phi_sum = np.zeros((k, n_terms), dtype=np.float64)
    samples = 0

    for sweep in range(iterations):
        for i in range(n_tokens):
            d = doc_of[i]
            w = term_of[i]
            old = z[i]
            n_dt[d, old] -= 1
            n_tw[old, w] -= 1
            n_t[old] -= 1

            total = 0.0
            for t in range(k):
                total += (n_dt[d, t] + alpha) * (n_tw[t, w] + beta) / (n_t[t] + vbeta)
                cumulative[t] = total
            u = _next_uniform(state) * total
            new = 0
            while new < k - 1 and cumulative[new] <= u:
                new += 1

            z[i] = new
            n_dt[d, new] += 1
            n_tw[new, w] += 1
            n_t[new] += 1

        if avg_last > 0 and sweep >= iterations - avg_last:
            for d in range(n_docs):
                n_d = 0
                for t in range(k):
                    n_d += n_dt[d, t]
                denom = n_d + k * alpha
                for t in range(k):
                    theta_sum[d, t] += (n_dt[d, t] + alpha) / denom
            for t in range(k):
                denom = n_t[t] + vbeta
                for w in range(n_terms):
                    phi_sum[t, w] += (n_tw[t, w] + beta) / denom
            samples += 1

    return z, n_dt, n_tw, n_t, theta_sum, phi_sum, samples


def _token_stream(dtm: DocTermMatrix) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Expand the matrix into the fixed global token order.

    Documents are visited in sorted-id order, terms within a document in
    ascending vocabulary-index order, each repeated by its count; the returned
    row_order maps sorted position -> original row index.
    """
    row_order = sorted(range(dtm.n_docs), key=lambda r: dtm.doc_ids[r])
    docs: list[int] = []
    terms: list[int] = []
    for stream_doc, row in enumerate(row_order):
        for column in sorted(dtm.rows[row]):
            count = dtm.rows[row][column]
            docs.extend([stream_doc] * count)
            terms.extend([column] * count)
    return (
        np.asarray(docs, dtype=np.int32),
        np.asarray(terms, dtype=np.int32),
        row_order,
    )


def fit_lda(dtm: DocTermMatrix, config: LdaConfig) -> TopicModel:
    """Fit the model by collapsed Gibbs sampling; deterministic given the seed."""
    config.validate()
    if dtm.n_docs == 0 or dtm.total_tokens() == 0:
        raise EmptyMatrix("document-term matrix has no tokens")

    doc_of, term_of, row_order = _token_stream(dtm)
    alpha = config.resolved_alpha()
    z, n_dt, n_tw, n_t, theta_sum, phi_sum, samples = _gibbs(
        doc_of,
        term_of,
        dtm.n_docs,
        dtm.n_terms,
        config.k,
        alpha,
        config.beta,
        config.iterations,
        config.average_last_m,
        np.uint64(config.seed & 0xFFFFFFFFFFFFFFFF),
    )

    if samples > 0:
        theta_sorted = theta_sum / samples
        phi = phi_sum / samples
    else:
        doc_totals = n_dt.sum(axis=1, keepdims=True)
        theta_sorted = (n_dt + alpha) / (doc_totals + config.k * alpha)
        phi = (n_tw + config.beta) / (n_t[:, None] + dtm.n_terms * config.beta)

    # undo the sorted-by-id row permutation so theta rows align with dtm rows
    theta = np.empty_like(theta_sorted)
    for stream_doc, row in enumerate(row_order):
        theta[row] = theta_sorted[stream_doc]

    return TopicModel(
        config=replace(config, alpha=alpha),
        doc_ids=dtm.doc_ids,
        vocabulary=dtm.vocabulary.terms,
        theta=theta,
        phi=phi,
        z=z,
    )


def top_words(model: TopicModel, topic: int, n: int = 25) -> list[str]:
    """Terms of one topic sorted by descending phi, ties broken lexicographically."""
    if not 0 <= topic < model.k:
        raise TopicOutOfRange(f"topic {topic} not in [0, {model.k})")
    n = min(n, len(model.vocabulary))
    row = model.phi[topic]
    order = sorted(range(len(model.vocabulary)), key=lambda w: (-row[w], model.vocabulary[w]))
    return [model.vocabulary[w] for w in order[:n]]


def log_likelihood(model: TopicModel, dtm: DocTermMatrix) -> float:
    """Corpus log-likelihood under the point estimates: sum count*log(theta @ phi)."""
    if model.doc_ids != dtm.doc_ids or model.vocabulary != dtm.vocabulary.terms:
        raise ModelMatrixMismatch("model was not fitted on this matrix")
    total = 0.0
    for row_index, row in enumerate(dtm.rows):
        mixture = model.theta[row_index] @ model.phi
        for column, count in row.items():
            total += count * np.log(mixture[column])
    return float(total)


def write_model(model: TopicModel, directory: Path | str) -> None:
    """Serialize a model directory: config, theta.csv, phi.csv, z.bin, topwords.json."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    config = model.config
    config_lines = [
        f"k={config.k}",
        f"alpha={config.resolved_alpha()!r}",
        f"beta={config.beta!r}",
        f"iterations={config.iterations}",
        f"burn_in={config.burn_in}",
        f"seed={config.seed}",
        f"average_last_m={config.average_last_m}",
    ]
    (directory / "config").write_text("\n".join(config_lines) + "\n", encoding="utf-8")

    with open(directory / "theta.csv", "w", encoding="utf-8") as handle:
        handle.write("doc_id," + ",".join(f"t{t}" for t in range(model.k)) + "\n")
        for doc_id, row in zip(model.doc_ids, model.theta):
            handle.write(doc_id + "," + ",".join(repr(float(v)) for v in row) + "\n")

    with open(directory / "phi.csv", "w", encoding="utf-8") as handle:
        handle.write("topic," + ",".join(model.vocabulary) + "\n")
        for t in range(model.k):
            handle.write(str(t) + "," + ",".join(repr(float(v)) for v in model.phi[t]) + "\n")

    # token-topic assignments in global token order, little-endian int32
    (directory / "z.bin").write_bytes(model.z.astype("<i4").tobytes())

    words = {str(t): top_words(model, t) for t in range(model.k)}
    (directory / "topwords.json").write_text(
        json.dumps(words, ensure_ascii=False, indent=1) + "\n", encoding="utf-8"
    )


def read_model(directory: Path | str) -> TopicModel:
    directory = Path(directory)
    fields: dict[str, str] = {}
    for line in (directory / "config").read_text(encoding="utf-8").splitlines():
        if line.strip():
            key, value = line.split("=", 1)
            fields[key] = value
    config = LdaConfig(
        k=int(fields["k"]),
        alpha=float(fields["alpha"]),
        beta=float(fields["beta"]),
        iterations=int(fields["iterations"]),
        burn_in=int(fields["burn_in"]),
        seed=int(fields["seed"]),
        average_last_m=int(fields["average_last_m"]),
    )

    doc_ids = []
    theta_rows = []
    with open(directory / "theta.csv", encoding="utf-8") as handle:
        next(handle)
        for line in handle:
            parts = line.rstrip("\n").split(",")
            # theta values are the trailing k fields; the id may contain commas
            doc_ids.append(",".join(parts[: len(parts) - config.k]))
            theta_rows.append([float(v) for v in parts[len(parts) - config.k :]])

    with open(directory / "phi.csv", encoding="utf-8") as handle:
        vocabulary = tuple(handle.readline().rstrip("\n").split(",")[1:])
        phi_rows = []
        for line in handle:
            parts = line.rstrip("\n").split(",")
            phi_rows.append([float(v) for v in parts[1:]])

    z = np.frombuffer((directory / "z.bin").read_bytes(), dtype="<i4").astype(np.int32)
    return TopicModel(
        config=config,
        doc_ids=tuple(doc_ids),
        vocabulary=vocabulary,
        theta=np.asarray(theta_rows, dtype=np.float64),
        phi=np.asarray(phi_rows, dtype=np.float64),
        z=z,
    )
