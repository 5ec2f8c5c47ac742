"""Bipartite building, tie filtering, projections, Louvain, and exports."""

import random
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from debatemap.errors import IoFailure
from debatemap.landscape import SpeakerTopicWeights
from debatemap.netgraph import (
    BipartiteGraph,
    EmptyGraph,
    FilteredView,
    InvalidLevel,
    NetworkError,
    NodeNotInView,
    PartitionIncomplete,
    Projection,
    UnsupportedFormat,
    build_bipartite,
    export_graph,
    filter_edges,
    graph_payload,
    louvain_communities,
    modularity,
    node_strengths,
    project_one_mode,
    projection_centralities,
    read_graph_json,
    topic_node_id,
    view_centralities,
    weighted_normalized_degree,
    write_graph_gexf,
)

TWO_CLIQUES_NODES = ("a", "b", "c", "d", "e", "f")
TWO_CLIQUES_EDGES = (
    ("a", "b", 1.0),
    ("b", "c", 1.0),
    ("a", "c", 1.0),
    ("d", "e", 1.0),
    ("e", "f", 1.0),
    ("d", "f", 1.0),
    ("c", "d", 1.0),
)


def weights_graph(table, k):
    weights = SpeakerTopicWeights(
        k=k, weights={name: np.asarray(row, dtype=np.float64) for name, row in table.items()}
    )
    return build_bipartite(weights)


# ------------------------------------------------------------------ bipartite


def test_build_bipartite_hand_case():
    graph = weights_graph({"B": [1.0, 3.0], "A": [2.0, 0.0]}, k=2)
    assert graph.affiliation_nodes == ("A", "B")  # sorted
    assert graph.topic_nodes == ("T0", "T1")  # all k topics even if unused
    assert graph.edges == (("A", "T0", 2.0), ("B", "T0", 1.0), ("B", "T1", 3.0))


def test_zero_weight_rows_keep_their_node():
    graph = weights_graph({"A": [1.0], "B": [0.0]}, k=1)
    assert graph.affiliation_nodes == ("A", "B")
    assert graph.edges == (("A", "T0", 1.0),)


def test_topic_node_id():
    assert topic_node_id(0) == "T0"
    assert topic_node_id(12) == "T12"


# ------------------------------------------------------------------ filtering


def test_filter_hand_case_per_topic():
    graph = weights_graph({"A": [10.0], "B": [4.0], "C": [2.0]}, k=1)
    survivors = lambda level: [c for c, _, _ in filter_edges(graph, level).edges]
    assert survivors(0.15) == ["A", "B", "C"]  # cutoff 1.5
    assert survivors(0.25) == ["A", "B"]  # cutoff 2.5
    assert survivors(1.0) == ["A"]  # only the maximum itself


def test_filter_cutoff_is_inclusive():
    graph = weights_graph({"A": [10.0], "B": [2.5]}, k=1)
    assert [c for c, _, _ in filter_edges(graph, 0.25).edges] == ["A", "B"]


def test_filter_is_per_topic_not_global():
    # T1's maximum is tiny but its own top tie still survives any level
    graph = weights_graph({"A": [10.0, 0.1], "B": [0.0, 0.08]}, k=2)
    view = filter_edges(graph, 0.9)
    assert ("A", "T1", pytest.approx(0.1)) in [
        (c, t, pytest.approx(w)) for c, t, w in view.edges
    ]
    globally = filter_edges(graph, 0.9, global_max=True)
    assert [(c, t) for c, t, _ in globally.edges] == [("A", "T0")]
    assert globally.global_max and not view.global_max


def test_filter_rejects_bad_levels():
    graph = weights_graph({"A": [1.0]}, k=1)
    for level in (0.0, -0.2, 1.0001, 5.0):
        with pytest.raises(InvalidLevel):
            filter_edges(graph, level)


def test_remove_isolates():
    graph = weights_graph({"A": [10.0, 0.0], "B": [2.0, 0.0]}, k=2)
    view = filter_edges(graph, 0.5)
    assert view.affiliation_nodes == ("A", "B")  # isolates kept by default
    assert view.topic_nodes == ("T0", "T1")
    trimmed = filter_edges(graph, 0.5, remove_isolates=True)
    assert trimmed.affiliation_nodes == ("A",)  # B lost its only tie
    assert trimmed.topic_nodes == ("T0",)  # T1 never had one
    assert trimmed.isolates_removed


def test_filter_against_exhaustive_oracle():
    """10^3 random weight tables: survivors must match the definition exactly."""
    rng = random.Random(42)
    levels = [0.1, 0.15, 0.25, 0.5, 0.75, 1.0]
    for _ in range(1000):
        n_affil = rng.randint(1, 6)
        k = rng.randint(1, 5)
        table = {
            f"c{i}": [rng.choice([0.0, rng.uniform(0.01, 9.0)]) for _ in range(k)]
            for i in range(n_affil)
        }
        level = rng.choice(levels)
        use_global = rng.random() < 0.3
        graph = weights_graph(table, k)
        view = filter_edges(graph, level, global_max=use_global)

        if use_global:
            reference = max((w for _, _, w in graph.edges), default=0.0)
            expected = {
                (c, t) for c, t, w in graph.edges if w >= level * reference
            }
        else:
            maxima = {}
            for _, t, w in graph.edges:
                maxima[t] = max(maxima.get(t, 0.0), w)
            expected = {
                (c, t) for c, t, w in graph.edges if w >= level * maxima[t]
            }
        assert {(c, t) for c, t, _ in view.edges} == expected
        if not use_global:
            # each topic that has any tie keeps its strongest one
            for t, m in maxima.items():
                assert any(tt == t and w == m for _, tt, w in view.edges)


# ----------------------------------------------------------------- centrality


def test_centrality_hand_case():
    graph = weights_graph({"A": [10.0, 4.0], "B": [4.0, 0.0]}, k=2)
    view = filter_edges(graph, 0.1)
    cents = view_centralities(view)
    assert cents["A"] == 1.0  # strength 14 is the affiliation max
    assert cents["B"] == pytest.approx(4.0 / 14.0, abs=1e-6)
    assert cents["T0"] == 1.0  # strength 14 tops the topic category
    assert cents["T1"] == pytest.approx(4.0 / 14.0, abs=1e-6)
    assert weighted_normalized_degree(view, "B") == cents["B"]


def test_centrality_sum_normalization():
    graph = weights_graph({"A": [10.0, 4.0], "B": [4.0, 0.0]}, k=2)
    view = filter_edges(graph, 0.1)
    cents = view_centralities(view, normalization="sum")
    assert cents["A"] == pytest.approx(14.0 / 18.0)
    assert cents["B"] == pytest.approx(4.0 / 18.0)
    assert sum(cents[n] for n in view.affiliation_nodes) == pytest.approx(1.0)
    assert sum(cents[n] for n in view.topic_nodes) == pytest.approx(1.0)


def test_centrality_scale_invariance():
    rng = random.Random(7)
    table = {f"c{i}": [rng.uniform(0.1, 5.0) for _ in range(3)] for i in range(5)}
    scaled = {name: [w * 37.5 for w in row] for name, row in table.items()}
    for normalization in ("max", "sum"):
        a = view_centralities(filter_edges(weights_graph(table, 3), 0.2), normalization)
        b = view_centralities(filter_edges(weights_graph(scaled, 3), 0.2), normalization)
        assert set(a) == set(b)
        for node in a:
            assert a[node] == pytest.approx(b[node], abs=1e-9)


def test_centrality_unknown_node_and_normalization():
    view = filter_edges(weights_graph({"A": [1.0]}, k=1), 0.5)
    with pytest.raises(NodeNotInView):
        weighted_normalized_degree(view, "ghost")
    with pytest.raises(NetworkError):
        view_centralities(view, normalization="median")


def test_isolate_categories_get_zero():
    graph = weights_graph({"A": [0.0]}, k=1)  # no edges at all
    view = filter_edges(graph, 0.5)
    cents = view_centralities(view)
    assert cents == {"A": 0.0, "T0": 0.0}


# ----------------------------------------------------------------- projection


def test_projection_product_hand_case():
    graph = weights_graph({"A": [2.0, 1.0], "B": [3.0, 4.0]}, k=2)
    view = filter_edges(graph, 0.1)
    projection = project_one_mode(view)
    assert projection.method == "product"
    assert projection.nodes == ("A", "B")
    # shared topics T0 and T1: 2*3 + 1*4 = 10
    assert projection.edges == (("A", "B", 10.0),)


def test_projection_count_and_min():
    graph = weights_graph({"A": [2.0, 1.0], "B": [3.0, 4.0]}, k=2)
    view = filter_edges(graph, 0.1)
    assert project_one_mode(view, "count").edges == (("A", "B", 2.0),)
    assert project_one_mode(view, "min").edges == (("A", "B", 3.0),)  # 2 + 1
    with pytest.raises(NetworkError):
        project_one_mode(view, "jaccard")


def test_projection_disjoint_supports_share_nothing():
    graph = weights_graph({"A": [2.0, 0.0], "B": [0.0, 4.0]}, k=2)
    projection = project_one_mode(filter_edges(graph, 0.1))
    assert projection.edges == ()
    assert projection.nodes == ("A", "B")


def test_projection_edges_are_ordered_pairs():
    graph = weights_graph({"zeta": [1.0], "alpha": [1.0], "mid": [1.0]}, k=1)
    projection = project_one_mode(filter_edges(graph, 0.1))
    for source, target, _ in projection.edges:
        assert source < target
    assert [(s, t) for s, t, _ in projection.edges] == sorted(
        (s, t) for s, t, _ in projection.edges
    )


def test_projection_against_dense_matmul_oracle():
    rng = random.Random(11)
    for _ in range(50):
        n_affil = rng.randint(2, 6)
        k = rng.randint(1, 5)
        table = {
            f"c{i}": [rng.choice([0.0, rng.uniform(0.1, 4.0)]) for _ in range(k)]
            for i in range(n_affil)
        }
        view = filter_edges(weights_graph(table, k), rng.choice([0.1, 0.3, 0.6]))
        names = list(view.affiliation_nodes)
        matrix = np.zeros((len(names), k))
        for c, t, w in view.edges:
            matrix[names.index(c), int(t[1:])] = w
        dense = matrix @ matrix.T
        got = {(s, t): w for s, t, w in project_one_mode(view).edges}
        for i in range(len(names)):
            for j in range(i + 1, len(names)):
                expected = dense[i, j]
                key = tuple(sorted((names[i], names[j])))
                if expected > 0:
                    assert got[key] == pytest.approx(expected, abs=1e-9)
                else:
                    assert key not in got


def test_projection_centralities_normalize_within_single_category():
    projection = Projection(nodes=("A", "B", "C"), edges=(("A", "B", 3.0), ("B", "C", 1.0)))
    cents = projection_centralities(projection)
    assert cents["B"] == 1.0  # strength 4
    assert cents["A"] == pytest.approx(3.0 / 4.0)
    assert cents["C"] == pytest.approx(1.0 / 4.0)


# ----------------------------------------------------------------- modularity


def test_modularity_two_disjoint_edges():
    nodes = ("a", "b", "c", "d")
    edges = (("a", "b", 1.0), ("c", "d", 1.0))
    by_component = {"a": 0, "b": 0, "c": 1, "d": 1}
    assert modularity(nodes, edges, by_component) == pytest.approx(0.5, abs=1e-12)
    # at resolution 2 the null model is halved: Q = 1 - (1/2)/2 * 2 = 0.75
    assert modularity(nodes, edges, by_component, resolution=2.0) == pytest.approx(0.75)


def test_modularity_single_edge_one_block_is_zero():
    assert modularity(("a", "b"), (("a", "b", 1.0),), {"a": 0, "b": 0}) == pytest.approx(
        0.0, abs=1e-12
    )


def test_modularity_self_loop_counts_twice():
    # lone self-loop: internal mass equals total mass, Q = 1 - 1 = 0
    assert modularity(("a",), (("a", "a", 1.0),), {"a": 0}) == pytest.approx(0.0, abs=1e-12)
    strengths = node_strengths(("a",), (("a", "a", 1.0),))
    assert strengths["a"] == 2.0


def test_modularity_edgeless_graph_is_zero():
    assert modularity(("a", "b"), (), {"a": 0, "b": 1}) == 0.0


def test_modularity_requires_complete_partition():
    with pytest.raises(PartitionIncomplete):
        modularity(("a", "b"), (("a", "b", 1.0),), {"a": 0})


# -------------------------------------------------------------------- louvain


def test_louvain_recovers_two_cliques():
    result = louvain_communities(TWO_CLIQUES_NODES, TWO_CLIQUES_EDGES, seed=2017)
    assert result.n_communities == 2
    c = result.communities
    assert c["a"] == c["b"] == c["c"]
    assert c["d"] == c["e"] == c["f"]
    assert c["a"] != c["d"]
    assert c["a"] == 0  # ids contiguous, numbered by first sorted appearance
    assert result.modularity == pytest.approx(5.0 / 14.0, abs=1e-12)


def _all_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _all_partitions(rest):
        for i, block in enumerate(part):
            yield part[:i] + [block + [first]] + part[i + 1 :]
        yield part + [[first]]


def brute_force_best(nodes, edges, resolution):
    best = -np.inf
    for part in _all_partitions(list(nodes)):
        assignment = {n: i for i, block in enumerate(part) for n in block}
        best = max(best, modularity(nodes, edges, assignment, resolution=resolution))
    return best


@pytest.mark.parametrize("resolution", [0.33, 1.0, 3.0])
def test_louvain_attains_partition_optimum_on_cliques(resolution):
    result = louvain_communities(TWO_CLIQUES_NODES, TWO_CLIQUES_EDGES, resolution=resolution)
    best = brute_force_best(TWO_CLIQUES_NODES, TWO_CLIQUES_EDGES, resolution)
    assert result.modularity == pytest.approx(best, abs=1e-12)


@pytest.mark.parametrize("resolution", [0.33, 1.0, 3.0])
def test_louvain_attains_partition_optimum_on_weighted_graph(resolution):
    nodes = ("h", "x", "y", "p", "q")
    edges = (
        ("h", "x", 3.0),
        ("h", "y", 3.0),
        ("x", "y", 1.0),
        ("p", "q", 2.0),
        ("q", "h", 0.5),
    )
    result = louvain_communities(nodes, edges, resolution=resolution)
    assert result.modularity == pytest.approx(brute_force_best(nodes, edges, resolution), abs=1e-12)


def test_louvain_attains_partition_optimum_on_eight_nodes():
    nodes = tuple("abcdefgh")
    edges = (
        ("a", "b", 1.0),
        ("b", "c", 1.0),
        ("c", "d", 1.0),
        ("d", "a", 1.0),
        ("e", "f", 1.0),
        ("f", "g", 1.0),
        ("g", "h", 1.0),
        ("h", "e", 1.0),
        ("d", "e", 0.5),
    )
    result = louvain_communities(nodes, edges, seed=2017)
    assert result.n_communities == 2
    assert result.modularity == pytest.approx(brute_force_best(nodes, edges, 1.0), abs=1e-12)


def test_louvain_community_count_non_increasing_in_resolution():
    counts = [
        louvain_communities(TWO_CLIQUES_NODES, TWO_CLIQUES_EDGES, resolution=rho).n_communities
        for rho in (0.33, 1.0, 3.0)
    ]
    assert counts == sorted(counts, reverse=True)
    assert counts[0] > counts[-1]  # the sweep actually merges something


def test_louvain_beats_singletons():
    singletons = {n: i for i, n in enumerate(TWO_CLIQUES_NODES)}
    base = modularity(TWO_CLIQUES_NODES, TWO_CLIQUES_EDGES, singletons)
    result = louvain_communities(TWO_CLIQUES_NODES, TWO_CLIQUES_EDGES)
    assert result.modularity >= base


def test_louvain_deterministic_per_seed():
    a = louvain_communities(TWO_CLIQUES_NODES, TWO_CLIQUES_EDGES, seed=5)
    b = louvain_communities(TWO_CLIQUES_NODES, TWO_CLIQUES_EDGES, seed=5)
    assert a == b


def test_louvain_edgeless_graph_is_all_singletons():
    result = louvain_communities(("x", "y", "z"), ())
    assert result.n_communities == 3
    assert result.modularity == 0.0
    assert sorted(result.communities.values()) == [0, 1, 2]


def test_louvain_ids_are_contiguous():
    result = louvain_communities(TWO_CLIQUES_NODES, TWO_CLIQUES_EDGES)
    ids = set(result.communities.values())
    assert ids == set(range(result.n_communities))


def test_louvain_rejects_empty_and_bad_resolution():
    with pytest.raises(EmptyGraph):
        louvain_communities((), ())
    with pytest.raises(NetworkError):
        louvain_communities(("a",), (), resolution=0.0)


# -------------------------------------------------------------------- exports


def sample_view_payload():
    graph = weights_graph({"A": [10.0, 4.0], "B": [4.0, 6.0]}, k=2)
    view = filter_edges(graph, 0.1)
    assignment = louvain_communities(view.nodes, view.edges, resolution=1.0, seed=2017)
    return graph_payload(view, assignment, view_centralities(view), level=0.1), view


def test_graph_payload_structure():
    payload, view = sample_view_payload()
    assert payload["schema_version"] == 1
    assert [n["id"] for n in payload["nodes"]] == ["A", "B", "T0", "T1"]
    categories = {n["id"]: n["category"] for n in payload["nodes"]}
    assert categories == {
        "A": "affiliation",
        "B": "affiliation",
        "T0": "topic",
        "T1": "topic",
    }
    for node in payload["nodes"]:
        assert set(node) == {"id", "category", "strength", "centrality", "community"}
    assert payload["edges"] == sorted(payload["edges"], key=lambda e: (e["source"], e["target"]))
    meta = payload["meta"]
    assert meta["mode"] == "two"
    assert meta["level"] == 0.1
    assert meta["resolution"] == 1.0
    assert meta["seed"] == 2017
    assert meta["isolates_removed"] is False
    assert meta["global_max"] is False
    assert isinstance(meta["modularity"], float)


def test_topic_nodes_sort_numerically():
    table = {"A": [1.0] * 12}
    view = filter_edges(weights_graph(table, 12), 0.5)
    assignment = louvain_communities(view.nodes, view.edges)
    payload = graph_payload(view, assignment, view_centralities(view), level=0.5)
    topic_ids = [n["id"] for n in payload["nodes"] if n["category"] == "topic"]
    assert topic_ids == [f"T{t}" for t in range(12)]  # T2 before T10


def test_projection_payload_meta():
    graph = weights_graph({"A": [2.0, 1.0], "B": [3.0, 4.0]}, k=2)
    view = filter_edges(graph, 0.1)
    projection = project_one_mode(view)
    assignment = louvain_communities(projection.nodes, projection.edges, seed=1)
    payload = graph_payload(
        projection, assignment, projection_centralities(projection), level=0.1
    )
    assert payload["meta"]["mode"] == "one"
    assert payload["meta"]["method"] == "product"
    assert "global_max" not in payload["meta"]
    assert [n["category"] for n in payload["nodes"]] == ["affiliation", "affiliation"]


def test_json_round_trip(tmp_path):
    payload, _ = sample_view_payload()
    path = tmp_path / "graph.json"
    export_graph(payload, "json", path)
    assert read_graph_json(path) == payload


def test_gexf_structure(tmp_path):
    payload, _ = sample_view_payload()
    path = tmp_path / "graph.gexf"
    write_graph_gexf(payload, path)
    ns = {"g": "http://www.gexf.net/1.2draft"}
    root = ET.parse(path).getroot()
    assert root.tag == "{http://www.gexf.net/1.2draft}gexf"
    graph = root.find("g:graph", ns)
    assert graph.get("defaultedgetype") == "undirected"
    nodes = graph.find("g:nodes", ns).findall("g:node", ns)
    assert [n.get("id") for n in nodes] == [n["id"] for n in payload["nodes"]]
    # community attribute values round-trip through attvalues
    by_id = {n["id"]: n for n in payload["nodes"]}
    titles = {
        a.get("id"): a.get("title")
        for a in graph.find("g:attributes", ns).findall("g:attribute", ns)
    }
    for node in nodes:
        values = {
            titles[v.get("for")]: v.get("value")
            for v in node.find("g:attvalues", ns).findall("g:attvalue", ns)
        }
        assert values["community"] == str(by_id[node.get("id")]["community"])
        assert values["category"] == by_id[node.get("id")]["category"]
    edges = graph.find("g:edges", ns).findall("g:edge", ns)
    assert len(edges) == len(payload["edges"])


def test_edge_csv(tmp_path):
    payload, _ = sample_view_payload()
    path = tmp_path / "edges.csv"
    export_graph(payload, "csv", path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "source,target,weight"
    assert len(lines) == 1 + len(payload["edges"])
    assert lines[1].startswith("A,T0,")


def test_unknown_format_rejected(tmp_path):
    payload, _ = sample_view_payload()
    with pytest.raises(UnsupportedFormat):
        export_graph(payload, "graphml", tmp_path / "graph.graphml")


def test_io_failures_are_wrapped(tmp_path):
    payload, _ = sample_view_payload()
    with pytest.raises(IoFailure):
        export_graph(payload, "json", tmp_path)  # a directory, not a file
    with pytest.raises(IoFailure):
        read_graph_json(tmp_path / "missing.json")
