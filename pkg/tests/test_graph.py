import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mobgraph import (
    build_graph,
    components,
    degrees,
    is_strongly_connected,
    largest_component_subgraph,
    prune_low_degree,
    reciprocal_weights,
    shortest_path_distances,
    sparsity_pattern,
    transition_matrix,
)
from mobgraph.errors import GraphError, MobGraphError
from oracles import brute_distances, is_irreducible, random_graph


class TestBuildGraph:
    def test_undirected_edge_stored_symmetrically(self):
        g = build_graph([("a", "b", 1)], directed=False)
        assert g.n == 2
        assert np.array_equal(g.dense(), [[0, 1], [1, 0]])

    def test_duplicate_edge_rejected(self):
        with pytest.raises(GraphError, match="duplicate edge"):
            build_graph([("a", "b", 1), ("a", "b", 2)], directed=True)

    def test_undirected_reverse_duplicate_rejected(self):
        with pytest.raises(GraphError, match="duplicate edge"):
            build_graph([("a", "b", 1), ("b", "a", 1)], directed=False)

    @pytest.mark.parametrize("w", [0, -1.5, float("nan")])
    def test_non_positive_weight_rejected(self, w):
        with pytest.raises(GraphError, match="weight"):
            build_graph([("a", "b", w)], directed=True)

    def test_single_arc_degrees(self):
        g = build_graph([("a", "b", 2.5)], directed=True)
        out, inn = degrees(g, "out"), degrees(g, "in")
        assert out[g.index("a")] == 2.5
        assert inn[g.index("b")] == 2.5
        assert out[g.index("b")] == 0

    def test_graph_is_immutable(self, path3):
        with pytest.raises(ValueError):
            path3.adjacency.data[0] = 7.0

    def test_errors_name_module_and_operation(self):
        with pytest.raises(MobGraphError) as info:
            build_graph([("a", "b", -1)], directed=True)
        assert str(info.value).startswith("graph.build_graph:")

    def test_isolated_nodes_via_node_list(self):
        g = build_graph([("a", "b", 1)], directed=False, nodes=["a", "b", "z"])
        assert g.n == 3 and g.labels[-1] == "z"

    def test_coords_must_cover_nodes(self):
        with pytest.raises(GraphError, match="coordinates"):
            build_graph([("a", "b", 1)], directed=False, coords={"a": (0, 0)})


class TestDegrees:
    def test_path(self, path3):
        assert degrees(path3, "out").tolist() == [1, 2, 1]

    def test_cycle_out_degrees(self, cycle3):
        assert degrees(cycle3, "out").tolist() == [1, 1, 1]

    def test_in_degrees_of_weighted_arc(self):
        g = build_graph([("a", "b", 2.5)], directed=True)
        assert degrees(g, "in").tolist() == [0, 2.5]

    def test_undirected_in_equals_out(self):
        g = random_graph(np.random.default_rng(3), 12, 0.3, directed=False)
        assert np.array_equal(degrees(g, "in"), degrees(g, "out"))


class TestShortestPaths:
    def test_unit_chain(self, path3):
        assert shortest_path_distances(path3, "a").tolist() == [0, 1, 2]

    def test_directed_dead_end_source(self):
        g = build_graph([("a", "b", 1), ("b", "c", 1)], directed=True)
        d = shortest_path_distances(g, "c")
        assert d.tolist() == [math.inf, math.inf, 0]

    def test_triangle_detour(self):
        g = build_graph([("a", "b", 1), ("b", "c", 1), ("a", "c", 3)], directed=False)
        expected = brute_distances(g)[g.index("a"), g.index("c")]
        assert expected == 2
        assert shortest_path_distances(g, "a")[g.index("c")] == expected

    def test_unknown_source(self, path3):
        with pytest.raises(GraphError, match="unknown node"):
            shortest_path_distances(path3, "zz")

    @pytest.mark.parametrize("seed", range(10))
    @pytest.mark.parametrize("directed", [False, True])
    def test_matches_brute_force(self, seed, directed):
        g = random_graph(np.random.default_rng(seed), 6, 0.4, directed)
        ref = brute_distances(g)
        got = np.vstack([shortest_path_distances(g, lab) for lab in g.labels])
        assert np.array_equal(got, ref)

    def test_undirected_distances_symmetric(self):
        g = random_graph(np.random.default_rng(11), 15, 0.25, directed=False)
        d = np.vstack([shortest_path_distances(g, lab) for lab in g.labels])
        assert np.array_equal(d, d.T)

    def test_directed_distances_can_be_asymmetric(self):
        g = build_graph([("a", "b", 1), ("b", "c", 1), ("c", "a", 1)], directed=True)
        assert shortest_path_distances(g, "a")[g.index("b")] == 1
        assert shortest_path_distances(g, "b")[g.index("a")] == 2

    def test_reciprocal_weights(self):
        g = build_graph([("a", "b", 4.0)], directed=True)
        assert reciprocal_weights(g).dense()[0, 1] == 0.25


class TestComponents:
    def test_two_disjoint_edges(self):
        g = build_graph([("a", "b", 1), ("c", "d", 1)], directed=False)
        assert components(g, "weak").count == 2

    def test_cycle_is_one_strong_component(self, cycle3):
        assert components(cycle3, "strong").count == 1

    def test_single_arc(self, arc):
        assert components(arc, "strong").count == 2
        assert components(arc, "weak").count == 1

    def test_sizes_sum_to_n(self):
        g = random_graph(np.random.default_rng(5), 20, 0.08, directed=True)
        dec = components(g, "strong")
        assert dec.sizes.sum() == g.n and dec.assignment.shape == (g.n,)

    @pytest.mark.parametrize("seed", range(15))
    def test_strong_equals_weak_for_undirected(self, seed):
        g = random_graph(np.random.default_rng(seed), 10, 0.15, directed=False)
        assert np.array_equal(components(g, "strong").assignment, components(g, "weak").assignment)

    @pytest.mark.parametrize("seed", range(40))
    def test_strong_connectivity_matches_irreducibility(self, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, int(rng.integers(1, 7)), 0.35, directed=True)
        assert is_strongly_connected(g) == is_irreducible(g.dense())

    @pytest.mark.parametrize("seed", range(10))
    def test_strong_assignment_is_mutual_reachability(self, seed):
        from oracles import reachability

        g = random_graph(np.random.default_rng(seed), 7, 0.25, directed=True)
        r = reachability(g.dense())
        a = components(g, "strong").assignment
        same = a[:, None] == a[None, :]
        assert np.array_equal(same, r & r.T)


class TestLargestComponent:
    def test_picks_cycle(self):
        g = build_graph(
            [("a", "b", 1), ("c", "d", 1), ("d", "e", 1), ("e", "c", 1)], directed=True
        )
        sub, mapping = largest_component_subgraph(g, "strong")
        assert set(sub.labels) == {"c", "d", "e"}
        assert len(set(mapping.values())) == len(mapping)

    def test_connected_graph_identity(self, path3):
        sub, mapping = largest_component_subgraph(path3, "weak")
        assert mapping == {0: 0, 1: 1, 2: 2}
        assert sub.labels == path3.labels

    def test_tie_goes_to_smallest_index(self):
        g = build_graph(
            [("0", "1", 1), ("1", "0", 1), ("2", "3", 1), ("3", "2", 1)], directed=True
        )
        sub, _ = largest_component_subgraph(g, "strong")
        assert "0" in sub.labels

    def test_tie_rule_with_later_first_component(self):
        # node order puts the {2,3} pair's members first in the label list
        g = build_graph(
            [("x", "y", 1), ("y", "x", 1), ("p", "q", 1), ("q", "p", 1)],
            directed=True,
            nodes=["p", "x", "y", "q"],
        )
        sub, mapping = largest_component_subgraph(g, "strong")
        assert set(sub.labels) == {"p", "q"} and 0 in mapping

    @pytest.mark.parametrize("seed", range(10))
    def test_idempotent(self, seed):
        g = random_graph(np.random.default_rng(seed), 15, 0.12, directed=True)
        sub, _ = largest_component_subgraph(g, "strong")
        again, mapping = largest_component_subgraph(sub, "strong")
        assert again.labels == sub.labels
        assert mapping == {i: i for i in range(sub.n)}
        assert components(sub, "strong").count == 1


class TestPrune:
    def test_star_single_pass(self):
        g = build_graph([("c", "x", 1), ("c", "y", 1), ("c", "z", 1)], directed=False)
        out = prune_low_degree(g, 1)
        assert out.labels == ("c",) and out.n_edges == 0

    def test_cycle_unchanged(self):
        g = build_graph([("a", "b", 1), ("b", "c", 1), ("c", "a", 1)], directed=False)
        assert prune_low_degree(g, 1).labels == g.labels

    def test_isolated_node_removed(self):
        g = build_graph([("a", "b", 1)], directed=False, nodes=["z", "a", "b"])
        assert prune_low_degree(g, 0).labels == ("a", "b")

    def test_iterate_reaches_fixpoint(self):
        g = build_graph([("a", "b", 1), ("b", "c", 1), ("c", "d", 1)], directed=False)
        once = prune_low_degree(g, 1)
        assert once.labels == ("b", "c")
        assert prune_low_degree(g, 1, iterate=True).is_empty

    def test_empty_result_flagged(self, caplog):
        g = build_graph([("a", "b", 1)], directed=False)
        with caplog.at_level("WARNING"):
            out = prune_low_degree(g, 1)
        assert out.is_empty and "removed every node" in caplog.text

    def test_negative_threshold(self, path3):
        with pytest.raises(GraphError):
            prune_low_degree(path3, -1)


class TestTransitionMatrix:
    def test_equal_split(self, path3):
        p = transition_matrix(path3).toarray()
        assert p[1].tolist() == [0.5, 0.0, 0.5]

    def test_dead_end_rejected_with_label(self, arc):
        with pytest.raises(GraphError, match=r"dead-end.*'b'"):
            transition_matrix(arc)

    def test_weighted_ratio(self):
        g = build_graph([("a", "b", 1), ("a", "c", 3), ("b", "a", 1), ("c", "a", 1)], directed=True)
        assert transition_matrix(g).toarray()[0].tolist() == [0.0, 0.25, 0.75]

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 10_000), n=st.integers(2, 25))
    def test_row_stochastic(self, seed, n):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, n, 0.3, directed=True, weights=(0.1, 1.7, 13.0), strongly_connected=True)
        p = transition_matrix(g)
        rows = np.asarray(p.sum(axis=1)).ravel()
        assert np.abs(rows - 1).max() <= 1e-12
        assert p.data.min() >= 0 and p.data.max() <= 1


class TestSparsity:
    def test_undirected_edge(self):
        g = build_graph([("0", "1", 1)], directed=False)
        assert sparsity_pattern(g) == [(0, 1), (1, 0)]

    def test_empty(self):
        g = build_graph([], directed=False)
        assert sparsity_pattern(g) == []

    def test_cycle(self):
        g = build_graph([("0", "1", 1), ("1", "2", 1), ("2", "0", 1)], directed=True)
        assert sparsity_pattern(g) == [(0, 1), (1, 2), (2, 0)]
