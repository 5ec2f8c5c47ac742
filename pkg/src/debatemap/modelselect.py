"""Topic-count selection via mean pairwise divergence between topic-word rows.

For each candidate k a model is fitted (seed varied as base_seed XOR k so runs
stay independent but reproducible) and scored by the mean Jensen-Shannon
divergence over all unordered topic pairs. Well-separated topics score close
to ln 2; the chosen k is the first local peak of the score sequence.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DebatemapError
from .textprep import DocTermMatrix
from .topicmodel import LdaConfig, TopicModel, fit_lda


class ModelSelectError(DebatemapError):
    """Base class for selection errors."""


class DimensionMismatch(ModelSelectError):
    """The two distributions have different lengths."""


class NotADistribution(ModelSelectError):
    """Vector has negative mass or does not sum to 1."""


class SingleTopic(ModelSelectError):
    """Pairwise separation is undefined for fewer than two topics."""


class EmptyScan(ModelSelectError):
    """No candidate topic counts were given."""


class DeveaudScan(ModelSelectError):
    """Every candidate fit failed."""


def jensen_shannon(p: Sequence[float], q: Sequence[float]) -> float:
    """JSD(p, q) with natural log; symmetric, bounded by ln 2, and 0*log 0 = 0."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise DimensionMismatch(f"shapes {p.shape} and {q.shape} differ")
    for vec in (p, q):
        if (vec < 0).any() or abs(float(vec.sum()) - 1.0) > 1e-9:
            raise NotADistribution("input must be a probability vector summing to 1")
    m = (p + q) / 2.0

    def half_kl(a: np.ndarray) -> float:
        mask = a > 0
        return float(np.sum(a[mask] * np.log(a[mask] / m[mask])))

    return 0.5 * half_kl(p) + 0.5 * half_kl(q)


def _restrict_to_top_n(p: np.ndarray, q: np.ndarray, top_n: int) -> tuple[np.ndarray, np.ndarray]:
    """Project both rows onto the union of their top-n supports and renormalize."""
    top_p = np.argsort(-p, kind="stable")[:top_n]
    top_q = np.argsort(-q, kind="stable")[:top_n]
    support = np.union1d(top_p, top_q)
    p_r = p[support]
    q_r = q[support]
    return p_r / p_r.sum(), q_r / q_r.sum()


def deveaud_score(phi: np.ndarray, top_n: Optional[int] = None) -> float:
    """Mean pairwise JSD over unordered topic pairs of a (k, V) matrix."""
    phi = np.asarray(phi, dtype=np.float64)
    k = phi.shape[0]
    if k < 2:
        raise SingleTopic(f"need at least 2 topics, got {k}")
    total = 0.0
    for a in range(k):
        for b in range(a + 1, k):
            if top_n is None:
                total += jensen_shannon(phi[a], phi[b])
            else:
                p, q = _restrict_to_top_n(phi[a], phi[b], top_n)
                total += jensen_shannon(p, q)
    return total * 2.0 / (k * (k - 1))


@dataclass(frozen=True)
class ScanResult:
    """Score per candidate k, the chosen k, and any per-k failures."""

    ks: tuple[int, ...]
    scores: tuple[float, ...]
    chosen_k: int
    failures: tuple[tuple[int, str], ...] = ()


def select_first_local_peak(ks: Sequence[int], scores: Sequence[float]) -> int:
    """Smallest k whose score is above its predecessor and not below its successor.

    Boundary points qualify on their single inside comparison, so a strictly
    increasing sequence selects the last k and a plateau selects its left edge.
    """
    if len(ks) == 0:
        raise EmptyScan("no candidates scored")
    if len(ks) != len(scores):
        raise DimensionMismatch("ks and scores must have equal length")
    last = len(scores) - 1
    for i in range(len(scores)):
        rises = i == 0 or scores[i] > scores[i - 1]
        holds = i == last or scores[i] >= scores[i + 1]
        if rises and holds:
            return ks[i]
    return ks[last]


def scan_k(
    dtm: DocTermMatrix,
    ks: Sequence[int],
    base_config: LdaConfig,
    top_n: Optional[int] = None,
    max_workers: Optional[int] = None,
) -> ScanResult:
    """Fit and score each candidate k; per-k failures are recorded, not fatal.

    Raises DeveaudScan only when every candidate failed. Each candidate runs
    with seed = base seed XOR k so scans are reproducible yet decorrelated.
    """
    ks = tuple(ks)
    if not ks:
        raise EmptyScan("no candidate topic counts given")

    def run(k: int) -> float:
        config = LdaConfig(
            k=k,
            alpha=None,
            beta=base_config.beta,
            iterations=base_config.iterations,
            burn_in=base_config.burn_in,
            seed=base_config.seed ^ k,
            average_last_m=base_config.average_last_m,
        )
        model = fit_lda(dtm, config)
        return deveaud_score(model.phi, top_n=top_n)

    scored: list[tuple[int, float]] = []
    failures: list[tuple[int, str]] = []
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = [(k, pool.submit(run, k)) for k in ks]
        for k, future in futures:
            try:
                scored.append((k, future.result()))
            except Exception as exc:  # noqa: BLE001 - captured per candidate
                failures.append((k, f"{type(exc).__name__}: {exc}"))

    if not scored:
        raise DeveaudScan(
            "all candidates failed: " + "; ".join(f"k={k}: {msg}" for k, msg in failures)
        )
    scanned_ks = tuple(k for k, _ in scored)
    scores = tuple(score for _, score in scored)
    chosen = select_first_local_peak(scanned_ks, scores)
    return ScanResult(ks=scanned_ks, scores=scores, chosen_k=chosen, failures=tuple(failures))


def write_scan_report(
    result: ScanResult,
    csv_path: Path | str,
    json_path: Path | str,
    provenance: Optional[dict] = None,
) -> None:
    """CSV of (k, score) plus a chosen-k footer, and plot-ready JSON."""
    lines = ["k,score"]
    lines.extend(f"{k},{score!r}" for k, score in zip(result.ks, result.scores))
    lines.append(f"# chosen_k={result.chosen_k}")
    Path(csv_path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    payload = {
        "ks": list(result.ks),
        "scores": list(result.scores),
        "chosen_k": result.chosen_k,
        "failures": [{"k": k, "error": msg} for k, msg in result.failures],
    }
    if provenance:
        payload["provenance"] = provenance
    Path(json_path).write_text(
        json.dumps(payload, ensure_ascii=False, indent=1) + "\n", encoding="utf-8"
    )


def read_scan_report(json_path: Path | str) -> ScanResult:
    payload = json.loads(Path(json_path).read_text(encoding="utf-8"))
    return ScanResult(
        ks=tuple(payload["ks"]),
        scores=tuple(payload["scores"]),
        chosen_k=payload["chosen_k"],
        failures=tuple((f["k"], f["error"]) for f in payload.get("failures", [])),
    )
