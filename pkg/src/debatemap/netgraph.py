"""Speaker-topic network construction, filtering, projection, and clustering.

The bipartite graph links affiliations to topics by summed theta mass. A
filtered view keeps, per topic, the ties worth at least `level` times that
topic's strongest tie. Views project to affiliation-affiliation graphs and
cluster with Louvain, where the user-facing resolution rho scales the null
model by gamma = 1/rho so that lower rho yields more communities.
"""

from __future__ import annotations

import json
import random
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import SCHEMA_VERSION
from .errors import DebatemapError, IoFailure
from .landscape import SpeakerTopicWeights

CATEGORY_AFFILIATION = "affiliation"
CATEGORY_TOPIC = "topic"

Edge = tuple[str, str, float]


class NetworkError(DebatemapError):
    """Base class for network errors."""


class InvalidLevel(NetworkError):
    """Filter level outside (0, 1]."""


class NodeNotInView(NetworkError):
    """Centrality asked for a node the filtered view does not contain."""


class EmptyGraph(NetworkError):
    """Community detection needs at least one node."""


class PartitionIncomplete(NetworkError):
    """Partition does not cover every node."""


class UnsupportedFormat(NetworkError):
    """Unknown graph export format."""


def topic_node_id(topic: int) -> str:
    return f"T{topic}"


@dataclass(frozen=True)
class BipartiteGraph:
    """Affiliation-topic graph; one edge per positive weight."""

    affiliation_nodes: tuple[str, ...]
    topic_nodes: tuple[str, ...]
    edges: tuple[Edge, ...]  # (affiliation, topic id, weight > 0)


@dataclass(frozen=True)
class FilteredView:
    """Surviving edges after the per-topic (or global) level filter."""

    level: float
    global_max: bool
    isolates_removed: bool
    affiliation_nodes: tuple[str, ...]
    topic_nodes: tuple[str, ...]
    edges: tuple[Edge, ...]

    @property
    def nodes(self) -> tuple[str, ...]:
        return self.affiliation_nodes + self.topic_nodes

    def category(self, node: str) -> str:
        if node in self.affiliation_nodes:
            return CATEGORY_AFFILIATION
        if node in self.topic_nodes:
            return CATEGORY_TOPIC
        raise NodeNotInView(f"node {node!r} not in view")


@dataclass(frozen=True)
class Projection:
    """One-mode affiliation graph; weights from shared-topic products."""

    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]  # source < target, weight > 0
    method: str = "product"


@dataclass(frozen=True)
class CommunityAssignment:
    """Louvain result: contiguous community ids plus the achieved modularity."""

    resolution: float
    seed: int
    communities: Mapping[str, int]
    modularity: float

    @property
    def n_communities(self) -> int:
        return len(set(self.communities.values())) if self.communities else 0


def build_bipartite(weights: SpeakerTopicWeights) -> BipartiteGraph:
    """One edge per strictly positive affiliation-topic weight."""
    affiliations = tuple(sorted(weights.weights))
    topics = tuple(topic_node_id(t) for t in range(weights.k))
    edges = []
    for affiliation in affiliations:
        vector = weights.weights[affiliation]
        for t in range(weights.k):
            if vector[t] > 0:
                edges.append((affiliation, topic_node_id(t), float(vector[t])))
    return BipartiteGraph(affiliation_nodes=affiliations, topic_nodes=topics, edges=tuple(edges))


def filter_edges(
    graph: BipartiteGraph,
    level: float,
    remove_isolates: bool = False,
    global_max: bool = False,
) -> FilteredView:
    """Keep (c, t) iff w(c, t) >= level * max weight, max taken per topic.

    With global_max the reference is the single largest weight in the whole
    graph instead; per-topic maxima no longer necessarily survive then.
    """
    if not 0 < level <= 1:
        raise InvalidLevel(f"level must be in (0, 1], got {level}")

    if global_max:
        reference = max((w for _, _, w in graph.edges), default=0.0)
        cutoffs = {topic: level * reference for topic in graph.topic_nodes}
    else:
        maxima: dict[str, float] = {}
        for _, topic, weight in graph.edges:
            if weight > maxima.get(topic, 0.0):
                maxima[topic] = weight
        cutoffs = {topic: level * m for topic, m in maxima.items()}

    kept = tuple(
        (c, t, w) for c, t, w in graph.edges if t in cutoffs and w >= cutoffs[t]
    )

    affiliations = graph.affiliation_nodes
    topics = graph.topic_nodes
    if remove_isolates:
        connected = {c for c, _, _ in kept} | {t for _, t, _ in kept}
        affiliations = tuple(n for n in affiliations if n in connected)
        topics = tuple(n for n in topics if n in connected)

    return FilteredView(
        level=level,
        global_max=global_max,
        isolates_removed=remove_isolates,
        affiliation_nodes=affiliations,
        topic_nodes=topics,
        edges=kept,
    )


def node_strengths(nodes: Iterable[str], edges: Iterable[Edge]) -> dict[str, float]:
    """Sum of incident edge weights per node (self-loops count twice)."""
    strengths = {node: 0.0 for node in nodes}
    for source, target, weight in edges:
        strengths[source] += weight
        strengths[target] += weight
    return strengths


def view_centralities(view: FilteredView, normalization: str = "max") -> dict[str, float]:
    """Strength divided by the max (or sum) strength within the node's category."""
    strengths = node_strengths(view.nodes, view.edges)
    result: dict[str, float] = {}
    for group in (view.affiliation_nodes, view.topic_nodes):
        if not group:
            continue
        if normalization == "max":
            denom = max(strengths[n] for n in group)
        elif normalization == "sum":
            denom = sum(strengths[n] for n in group)
        else:
            raise NetworkError(f"unknown centrality normalization {normalization!r}")
        for n in group:
            result[n] = strengths[n] / denom if denom > 0 else 0.0
    return result


def weighted_normalized_degree(view: FilteredView, node: str, normalization: str = "max") -> float:
    if node not in view.affiliation_nodes and node not in view.topic_nodes:
        raise NodeNotInView(f"node {node!r} not in view")
    return view_centralities(view, normalization)[node]


def projection_centralities(projection: Projection, normalization: str = "max") -> dict[str, float]:
    """Single-category variant of view_centralities for one-mode graphs."""
    strengths = node_strengths(projection.nodes, projection.edges)
    if not projection.nodes:
        return {}
    if normalization == "max":
        denom = max(strengths.values())
    elif normalization == "sum":
        denom = sum(strengths.values())
    else:
        raise NetworkError(f"unknown centrality normalization {normalization!r}")
    return {n: (s / denom if denom > 0 else 0.0) for n, s in strengths.items()}


def project_one_mode(view: FilteredView, method: str = "product") -> Projection:
    """Affiliation-affiliation weights over the view's surviving topics.

    product: W(c,c') = sum_t w(c,t) * w(c',t)   (default)
    count:   number of topics shared
    min:     sum_t min(w(c,t), w(c',t))
    """
    if method not in ("product", "count", "min"):
        raise NetworkError(f"unknown projection method {method!r}")
    by_topic: dict[str, list[tuple[str, float]]] = {}
    for affiliation, topic, weight in view.edges:
        by_topic.setdefault(topic, []).append((affiliation, weight))

    totals: dict[tuple[str, str], float] = {}
    for incident in by_topic.values():
        incident = sorted(incident)
        for i in range(len(incident)):
            for j in range(i + 1, len(incident)):
                (a, wa), (b, wb) = incident[i], incident[j]
                if method == "product":
                    contribution = wa * wb
                elif method == "min":
                    contribution = min(wa, wb)
                else:
                    contribution = 1.0
                totals[(a, b)] = totals.get((a, b), 0.0) + contribution

    edges = tuple(
        (a, b, w) for (a, b), w in sorted(totals.items()) if w > 0
    )
    return Projection(nodes=view.affiliation_nodes, edges=edges, method=method)


def _adjacency(nodes: Sequence[str], edges: Iterable[Edge]) -> tuple[list[dict[int, float]], list[float]]:
    """Symmetric adjacency over node indexes; self-loop (u,u,w) stored as A_uu = 2w."""
    index = {node: i for i, node in enumerate(nodes)}
    adj: list[dict[int, float]] = [dict() for _ in nodes]
    loops = [0.0 for _ in nodes]
    for source, target, weight in edges:
        u, v = index[source], index[target]
        if u == v:
            loops[u] += 2.0 * weight
        else:
            adj[u][v] = adj[u].get(v, 0.0) + weight
            adj[v][u] = adj[v].get(u, 0.0) + weight
    return adj, loops


def modularity(
    nodes: Sequence[str],
    edges: Iterable[Edge],
    partition: Mapping[str, int],
    resolution: float = 1.0,
) -> float:
    """Q = (1/2m) * sum_ij [A_ij - (1/rho) * s_i s_j / (2m)] * delta(c_i, c_j).

    The i = j null term is included. An edgeless graph has Q = 0.
    """
    missing = [n for n in nodes if n not in partition]
    if missing:
        raise PartitionIncomplete(f"partition misses nodes: {missing[:5]}")
    adj, loops = _adjacency(nodes, edges)
    strengths = [sum(adj[i].values()) + loops[i] for i in range(len(nodes))]
    two_m = sum(strengths)
    if two_m == 0:
        return 0.0
    gamma = 1.0 / resolution

    internal: dict[int, float] = {}
    total: dict[int, float] = {}
    index = {node: i for i, node in enumerate(nodes)}
    for node, community in partition.items():
        if node not in index:
            continue
        i = index[node]
        total[community] = total.get(community, 0.0) + strengths[i]
        internal[community] = internal.get(community, 0.0) + loops[i]
        for j, weight in adj[i].items():
            if partition[nodes[j]] == community:
                internal[community] = internal.get(community, 0.0) + weight

    q = 0.0
    for community in total:
        q += internal.get(community, 0.0) / two_m - gamma * (total[community] / two_m) ** 2
    return q


def _local_moves(
    adj: list[dict[int, float]],
    loops: list[float],
    strengths: list[float],
    two_m: float,
    gamma: float,
    community: list[int],
    rng: random.Random,
) -> bool:
    """One level of greedy moves; returns whether any strict improvement happened."""
    n = len(adj)
    community_total = {}
    for i in range(n):
        community_total[community[i]] = community_total.get(community[i], 0.0) + strengths[i]

    improved = False
    moved = True
    while moved:
        moved = False
        order = list(range(n))
        rng.shuffle(order)
        for i in order:
            current = community[i]
            community_total[current] -= strengths[i]

            # weight from i into each neighbouring community (self excluded)
            links: dict[int, float] = {current: 0.0}
            for j, weight in adj[i].items():
                links[community[j]] = links.get(community[j], 0.0) + weight

            best_community = current
            stay_gain = links[current] - gamma * strengths[i] * community_total[current] / two_m
            best_gain = stay_gain
            for candidate in sorted(links):
                if candidate == current:
                    continue
                gain = links[candidate] - gamma * strengths[i] * community_total.get(candidate, 0.0) / two_m
                # ties go to the lowest community id, current included
                if gain > best_gain + 1e-12 or (
                    abs(gain - best_gain) <= 1e-12 and candidate < best_community
                ):
                    best_gain = gain
                    best_community = candidate

            community[i] = best_community
            community_total[best_community] = community_total.get(best_community, 0.0) + strengths[i]
            if best_community != current:
                moved = True
                if best_gain > stay_gain + 1e-12:
                    improved = True
    return improved


def louvain_communities(
    nodes: Sequence[str],
    edges: Iterable[Edge],
    resolution: float = 1.0,
    seed: int = 2017,
) -> CommunityAssignment:
    """Greedy modularity maximization with aggregation, at gamma = 1/resolution.

    Visit order is reshuffled each pass by the seeded RNG; among equally good
    candidate communities the lowest id wins. Community ids in the result are
    contiguous from 0, numbered by first appearance over sorted node ids.
    """
    nodes = tuple(nodes)
    if not nodes:
        raise EmptyGraph("no nodes to cluster")
    if resolution <= 0:
        raise NetworkError(f"resolution must be > 0, got {resolution}")
    edges = tuple(edges)
    rng = random.Random(seed)
    gamma = 1.0 / resolution

    # membership[original node index] -> community at the current level
    membership = list(range(len(nodes)))
    level_nodes = [str(i) for i in range(len(nodes))]
    level_edges: list[Edge] = []
    index = {node: i for i, node in enumerate(nodes)}
    for source, target, weight in edges:
        level_edges.append((str(index[source]), str(index[target]), weight))

    while True:
        adj, loops = _adjacency(level_nodes, level_edges)
        strengths = [sum(adj[i].values()) + loops[i] for i in range(len(level_nodes))]
        two_m = sum(strengths)
        if two_m == 0:
            break
        community = list(range(len(level_nodes)))
        improved = _local_moves(adj, loops, strengths, two_m, gamma, community, rng)
        if not improved:
            break

        # relabel level communities contiguously, then aggregate
        relabel: dict[int, int] = {}
        for c in community:
            if c not in relabel:
                relabel[c] = len(relabel)
        community = [relabel[c] for c in community]
        membership = [community[m] for m in membership]

        aggregated: dict[tuple[int, int], float] = {}
        for i, neighbours in enumerate(adj):
            ci = community[i]
            if loops[i]:
                key = (ci, ci)
                aggregated[key] = aggregated.get(key, 0.0) + loops[i] / 2.0
            for j, weight in neighbours.items():
                if j < i:
                    continue
                cj = community[j]
                key = (min(ci, cj), max(ci, cj))
                aggregated[key] = aggregated.get(key, 0.0) + weight
        level_nodes = [str(c) for c in range(len(relabel))]
        level_edges = [(str(a), str(b), w) for (a, b), w in sorted(aggregated.items())]

    # contiguous final ids by first appearance over sorted node names
    relabel = {}
    for node in sorted(nodes):
        c = membership[index[node]]
        if c not in relabel:
            relabel[c] = len(relabel)
    communities = {node: relabel[membership[index[node]]] for node in nodes}
    q = modularity(nodes, edges, communities, resolution=resolution)
    return CommunityAssignment(
        resolution=resolution, seed=seed, communities=communities, modularity=q
    )


def _ordered_nodes(graph: FilteredView | Projection) -> list[tuple[str, str]]:
    """(node id, category) pairs: affiliations sorted, then topics by index."""

    def topic_key(node: str) -> tuple[int, str]:
        suffix = node[1:]
        return (int(suffix), node) if suffix.isdigit() else (10**9, node)

    if isinstance(graph, FilteredView):
        ordered = [(n, CATEGORY_AFFILIATION) for n in sorted(graph.affiliation_nodes)]
        ordered.extend((n, CATEGORY_TOPIC) for n in sorted(graph.topic_nodes, key=topic_key))
        return ordered
    return [(n, CATEGORY_AFFILIATION) for n in sorted(graph.nodes)]


def graph_payload(
    graph: FilteredView | Projection,
    assignment: CommunityAssignment,
    centralities: Mapping[str, float],
    level: float,
) -> dict:
    """JSON-ready graph bundle with node attributes and filter/cluster metadata."""
    strengths = node_strengths([n for n, _ in _ordered_nodes(graph)], graph.edges)
    nodes = [
        {
            "id": node,
            "category": category,
            "strength": strengths[node],
            "centrality": centralities[node],
            "community": assignment.communities[node],
        }
        for node, category in _ordered_nodes(graph)
    ]
    edges = [
        {"source": s, "target": t, "weight": w}
        for s, t, w in sorted(graph.edges)
    ]
    meta: dict = {
        "level": level,
        "resolution": assignment.resolution,
        "seed": assignment.seed,
        "modularity": assignment.modularity,
        "mode": "two" if isinstance(graph, FilteredView) else "one",
    }
    if isinstance(graph, FilteredView):
        meta["isolates_removed"] = graph.isolates_removed
        meta["global_max"] = graph.global_max
    else:
        meta["method"] = graph.method
    return {"schema_version": SCHEMA_VERSION, "nodes": nodes, "edges": edges, "meta": meta}


def write_graph_json(payload: dict, path: Path | str) -> None:
    try:
        Path(path).write_text(
            json.dumps(payload, ensure_ascii=False, indent=1, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_graph_json(path: Path | str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def write_graph_gexf(payload: dict, path: Path | str) -> None:
    """GEXF 1.2, undirected, with category/strength/centrality/community attributes."""
    root = ET.Element("gexf", {"xmlns": "http://www.gexf.net/1.2draft", "version": "1.2"})
    graph = ET.SubElement(root, "graph", {"defaultedgetype": "undirected", "mode": "static"})
    attributes = ET.SubElement(graph, "attributes", {"class": "node"})
    for attr_id, (title, kind) in enumerate(
        [("category", "string"), ("strength", "double"), ("centrality", "double"), ("community", "integer")]
    ):
        ET.SubElement(attributes, "attribute", {"id": str(attr_id), "title": title, "type": kind})

    nodes = ET.SubElement(graph, "nodes")
    for node in payload["nodes"]:
        element = ET.SubElement(nodes, "node", {"id": node["id"], "label": node["id"]})
        values = ET.SubElement(element, "attvalues")
        for attr_id, key in enumerate(["category", "strength", "centrality", "community"]):
            ET.SubElement(values, "attvalue", {"for": str(attr_id), "value": str(node[key])})

    edges = ET.SubElement(graph, "edges")
    for edge_id, edge in enumerate(payload["edges"]):
        ET.SubElement(
            edges,
            "edge",
            {
                "id": str(edge_id),
                "source": edge["source"],
                "target": edge["target"],
                "weight": repr(float(edge["weight"])),
            },
        )

    tree = ET.ElementTree(root)
    ET.indent(tree, space="  ")
    try:
        tree.write(path, encoding="UTF-8", xml_declaration=True)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def write_edge_csv(payload: dict, path: Path | str) -> None:
    lines = ["source,target,weight"]
    lines.extend(
        f"{e['source']},{e['target']},{float(e['weight'])!r}" for e in payload["edges"]
    )
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def export_graph(payload: dict, fmt: str, path: Path | str) -> None:
    """Write a graph payload as json, gexf, or csv; unknown formats are rejected."""
    writers = {"json": write_graph_json, "gexf": write_graph_gexf, "csv": write_edge_csv}
    if fmt not in writers:
        raise UnsupportedFormat(f"format {fmt!r} not one of {sorted(writers)}")
    writers[fmt](payload, path)
