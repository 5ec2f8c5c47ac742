"""Assemble and validate the exported bundle the HTTP service reads.

A bundle directory is self-contained and immutable: corpus stats, the
landscape series, topic keywords, per-topic ranked speech lists, raw speech
records, and one graph payload per (mode, level, resolution) grid point.
The server loads everything into memory at startup and refuses to start on
a bundle that fails validation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import SCHEMA_VERSION
from .corpus import Corpus, speech_to_record
from .errors import DebatemapError
from .landscape import (
    LandscapeSeries,
    RankTable,
    landscape_payload,
    prominent_speeches,
    speaker_topic_weights,
)
from .netgraph import (
    build_bipartite,
    filter_edges,
    graph_payload,
    louvain_communities,
    project_one_mode,
    projection_centralities,
    view_centralities,
)
from .topicmodel import TopicModel, top_words

DEFAULT_LEVELS = (0.15, 0.25)
DEFAULT_RESOLUTIONS = (0.33, 1.0)
DEFAULT_THRESHOLD = 0.20
MODES = ("two", "one")


class BundleInvalid(DebatemapError):
    """The bundle directory is missing pieces or internally inconsistent."""


@dataclass
class Bundle:
    """In-memory image of a validated bundle directory."""

    root: Path
    manifest: dict
    stats: dict
    landscape: dict
    topics: dict
    speeches: dict[str, dict] = field(default_factory=dict)
    prominent: dict[int, list[dict]] = field(default_factory=dict)
    networks: dict[tuple[str, float, float], dict] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.manifest["k"]

    def advertised_pairs(self, mode: str) -> list[tuple[float, float]]:
        return sorted(
            (level, resolution)
            for m, level, resolution in self.networks
            if m == mode
        )


def _dump(payload: dict, path: Path) -> None:
    path.write_text(
        json.dumps(payload, ensure_ascii=False, indent=1, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def assemble_bundle(
    corpus: Corpus,
    model: TopicModel,
    series: LandscapeSeries,
    table: RankTable,
    out_dir: Path | str,
    levels: Sequence[float] = DEFAULT_LEVELS,
    resolutions: Sequence[float] = DEFAULT_RESOLUTIONS,
    seed: int = 2017,
    n_top_words: int = 25,
    projection_method: str = "product",
    normalization: str = "max",
    default_level: float = 0.25,
    default_resolution: float = 1.0,
    stats: Optional[dict] = None,
    provenance: Optional[dict] = None,
) -> Path:
    """Write a complete bundle directory; returns its root path.

    Networks keep isolates so the explorer can hide/show them client-side
    without changing anyone's centrality or community.
    """
    root = Path(out_dir)
    (root / "prominent").mkdir(parents=True, exist_ok=True)
    (root / "networks").mkdir(parents=True, exist_ok=True)

    keywords = {t: top_words(model, t, n_top_words) for t in range(model.k)}
    landscape = landscape_payload(series, table, keywords)
    landscape["schema_version"] = SCHEMA_VERSION
    if provenance:
        landscape["provenance"] = provenance
    _dump(landscape, root / "landscape.json")

    topics = {
        "schema_version": SCHEMA_VERSION,
        "topics": [
            {"id": f"T{t}", "index": t, "keywords": keywords[t]} for t in range(model.k)
        ],
    }
    _dump(topics, root / "topics.json")

    speech_meta = {s.id: s for s in corpus.speeches}
    with open(root / "speeches.jsonl", "w", encoding="utf-8") as handle:
        for speech in corpus.speeches:
            handle.write(json.dumps(speech_to_record(speech), ensure_ascii=False) + "\n")

    for t in range(model.k):
        ranked = []
        for doc_id, score in prominent_speeches(model, t, threshold=0.0):
            speech = speech_meta[doc_id]
            ranked.append(
                {
                    "id": doc_id,
                    "score": score,
                    "speaker_name": speech.speaker_name,
                    "affiliation": speech.affiliation,
                    "date": speech.date.isoformat(),
                    "year": speech.year,
                }
            )
        _dump(
            {"schema_version": SCHEMA_VERSION, "topic": f"T{t}", "speeches": ranked},
            root / "prominent" / f"topic_{t}.json",
        )

    weights = speaker_topic_weights(corpus, model)
    bipartite = build_bipartite(weights)
    network_entries = []
    for level in levels:
        view = filter_edges(bipartite, level, remove_isolates=False)
        view_centrality = view_centralities(view, normalization)
        projection = project_one_mode(view, projection_method)
        projection_centrality = projection_centralities(projection, normalization)
        for resolution in resolutions:
            two_assignment = louvain_communities(
                view.nodes, view.edges, resolution=resolution, seed=seed
            )
            one_assignment = louvain_communities(
                projection.nodes, projection.edges, resolution=resolution, seed=seed
            )
            for mode, graph, assignment, centrality in (
                ("two", view, two_assignment, view_centrality),
                ("one", projection, one_assignment, projection_centrality),
            ):
                payload = graph_payload(graph, assignment, centrality, level)
                name = f"{mode}_l{level!r}_r{resolution!r}.json"
                _dump(payload, root / "networks" / name)
                network_entries.append(
                    {
                        "mode": mode,
                        "level": level,
                        "resolution": resolution,
                        "file": f"networks/{name}",
                    }
                )

    _dump(stats or {}, root / "stats.json")

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "k": model.k,
        "levels": sorted(set(float(v) for v in levels)),
        "resolutions": sorted(set(float(v) for v in resolutions)),
        "modes": list(MODES),
        "networks": network_entries,
        "default_level": default_level,
        "default_resolution": default_resolution,
        "default_threshold": DEFAULT_THRESHOLD,
        "n_speeches": len(corpus.speeches),
        "n_documents": len(model.doc_ids),
        "provenance": provenance or {},
    }
    _dump(manifest, root / "manifest.json")
    return root


def _read_json(path: Path, what: str) -> dict:
    if not path.is_file():
        raise BundleInvalid(f"missing {what}: {path.name}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise BundleInvalid(f"unreadable {what}: {exc}") from exc


def load_bundle(root: Path | str) -> Bundle:
    """Load and validate a bundle directory; raises BundleInvalid on any defect."""
    root = Path(root)
    if not root.is_dir():
        raise BundleInvalid(f"bundle directory {root} does not exist")

    manifest = _read_json(root / "manifest.json", "manifest")
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise BundleInvalid(
            f"schema_version {manifest.get('schema_version')!r} != {SCHEMA_VERSION}"
        )
    k = manifest.get("k")
    if not isinstance(k, int) or k < 1:
        raise BundleInvalid(f"manifest k must be a positive integer, got {k!r}")

    stats = _read_json(root / "stats.json", "stats")
    landscape = _read_json(root / "landscape.json", "landscape")
    topics = _read_json(root / "topics.json", "topics")

    topic_list = topics.get("topics", [])
    if [t.get("id") for t in topic_list] != [f"T{t}" for t in range(k)]:
        raise BundleInvalid("topics.json ids do not cover T0..T{k-1} in order")

    years = landscape.get("years", [])
    shares = landscape.get("shares", [])
    if sorted(years) != years or len(shares) != len(years):
        raise BundleInvalid("landscape years must be ascending and aligned with shares")
    for row in shares:
        if len(row) != k:
            raise BundleInvalid("landscape share row length != k")
        if abs(sum(row) - 1.0) > 1e-9:
            raise BundleInvalid("landscape share row does not sum to 1")

    speeches: dict[str, dict] = {}
    speeches_path = root / "speeches.jsonl"
    if not speeches_path.is_file():
        raise BundleInvalid("missing speeches.jsonl")
    with open(speeches_path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if "id" not in record:
                raise BundleInvalid("speech record without id")
            if record["id"] in speeches:
                raise BundleInvalid(f"duplicate speech id {record['id']!r}")
            speeches[record["id"]] = record

    prominent: dict[int, list[dict]] = {}
    for t in range(k):
        payload = _read_json(root / "prominent" / f"topic_{t}.json", f"prominent list {t}")
        ranked = payload.get("speeches", [])
        previous = None
        for entry in ranked:
            if entry["id"] not in speeches:
                raise BundleInvalid(f"prominent list {t} references unknown id {entry['id']!r}")
            if previous is not None and entry["score"] > previous + 1e-12:
                raise BundleInvalid(f"prominent list {t} not sorted by descending score")
            previous = entry["score"]
        prominent[t] = ranked

    networks: dict[tuple[str, float, float], dict] = {}
    for entry in manifest.get("networks", []):
        mode = entry.get("mode")
        if mode not in MODES:
            raise BundleInvalid(f"unknown network mode {mode!r}")
        payload = _read_json(root / entry["file"], f"network {entry['file']}")
        node_ids = {n["id"] for n in payload.get("nodes", [])}
        for edge in payload.get("edges", []):
            if edge["source"] not in node_ids or edge["target"] not in node_ids:
                raise BundleInvalid(f"network {entry['file']} edge references unknown node")
        meta = payload.get("meta", {})
        if meta.get("level") != entry["level"] or meta.get("resolution") != entry["resolution"]:
            raise BundleInvalid(f"network {entry['file']} meta disagrees with manifest")
        networks[(mode, float(entry["level"]), float(entry["resolution"]))] = payload
    if not networks:
        raise BundleInvalid("manifest lists no networks")

    return Bundle(
        root=root,
        manifest=manifest,
        stats=stats,
        landscape=landscape,
        topics=topics,
        speeches=speeches,
        prominent=prominent,
        networks=networks,
    )
