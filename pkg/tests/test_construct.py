import json

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from mobgraph import ODMatrix, Partition, centroid, od_graph, read_od_csv, read_partition_geojson, region_adjacency_graph
from mobgraph.construct import ring_signed_area, write_od_csv
from mobgraph.errors import ConstructError


def square(x, y, s=1.0):
    return [[(x, y), (x + s, y), (x + s, y + s), (x, y + s), (x, y)]]


def grid_partition(rows, cols):
    items = [(f"{r},{c}", square(c, r)) for r in range(rows) for c in range(cols)]
    return Partition.from_polygons(items)


def edge_set(g):
    return {frozenset((u, v)) for u, v, _ in g.edges()}


class TestCentroid:
    def test_unit_square(self):
        assert np.allclose(centroid(square(0, 0)), (0.5, 0.5), atol=1e-12)

    def test_triangle(self):
        tri = [[(0, 0), (3, 0), (0, 3), (0, 0)]]
        assert np.allclose(centroid(tri), (1, 1), atol=1e-12)

    def test_rectangle(self):
        rect = [[(0, 0), (2, 0), (2, 1), (0, 1), (0, 0)]]
        assert np.allclose(centroid(rect), (1, 0.5), atol=1e-12)

    def test_clockwise_ring(self):
        rect = [[(0, 0), (0, 1), (2, 1), (2, 0), (0, 0)]]
        assert np.allclose(centroid(rect), (1, 0.5), atol=1e-12)

    def test_hole_shifts_centroid(self):
        shell = [(0, 0), (4, 0), (4, 4), (0, 4), (0, 0)]
        hole = [(2, 2), (2, 4 - 1e-9), (4 - 1e-9, 4 - 1e-9), (4 - 1e-9, 2), (2, 2)]
        # 16 minus a 2x2 hole in the top right; oracle from composite areas
        expected = (16 * np.array([2, 2]) - 4 * np.array([3, 3])) / 12
        assert np.allclose(centroid([shell, hole]), expected, atol=1e-6)

    def test_zero_area_rejected(self):
        with pytest.raises(ConstructError):
            centroid([[(0, 0), (1, 1), (2, 2), (0, 0)]])

    @settings(max_examples=50, deadline=None)
    @given(
        x=st.floats(-1e3, 1e3),
        y=st.floats(-1e3, 1e3),
        w=st.floats(0.01, 100),
        h=st.floats(0.01, 100),
    )
    def test_rectangle_centre(self, x, y, w, h):
        rect = [[(x, y), (x + w, y), (x + w, y + h), (x, y + h), (x, y)]]
        assert np.allclose(centroid(rect), (x + w / 2, y + h / 2), rtol=1e-9, atol=1e-9)

    def test_signed_area(self):
        ccw = np.array([(0, 0), (1, 0), (1, 1), (0, 1), (0, 0)], float)
        assert ring_signed_area(ccw) == 1.0
        assert ring_signed_area(ccw[::-1]) == -1.0


class TestRegionAdjacency:
    def test_grid_2x2_queen_is_k4(self):
        g = region_adjacency_graph(grid_partition(2, 2), "queen")
        assert g.n == 4 and len(edge_set(g)) == 6

    def test_grid_2x2_rook_is_c4(self):
        g = region_adjacency_graph(grid_partition(2, 2), "rook")
        assert len(edge_set(g)) == 4
        assert all(d == 2 for d in np.asarray(g.adjacency.sum(axis=1)).ravel())

    def test_strip_is_path(self):
        g = region_adjacency_graph(grid_partition(1, 3), "queen")
        assert edge_set(g) == {frozenset(("0,0", "0,1")), frozenset(("0,1", "0,2"))}

    def test_unit_weights_and_centroid_coords(self):
        g = region_adjacency_graph(grid_partition(1, 3))
        assert set(g.adjacency.data.tolist()) == {1.0}
        assert np.allclose(g.coords, [(0.5, 0.5), (1.5, 0.5), (2.5, 0.5)])

    def test_isolated_region_kept(self):
        items = [("a", square(0, 0)), ("b", square(1, 0)), ("far", square(10, 10))]
        g = region_adjacency_graph(Partition.from_polygons(items))
        assert g.n == 3 and g.adjacency[g.index("far")].nnz == 0

    def test_near_gap_snapped_by_tolerance(self):
        items = [("a", square(0, 0)), ("b", square(1 + 1e-7, 0))]
        p = Partition.from_polygons(items)
        assert region_adjacency_graph(p, tol=1e-9).n_edges == 0
        assert region_adjacency_graph(p, tol=1e-6).n_edges == 1

    def test_partial_shared_edge_is_rook(self):
        items = [("a", square(0, 0, 2)), ("b", square(2, 1, 2))]
        g = region_adjacency_graph(Partition.from_polygons(items), "rook")
        assert g.n_edges == 1

    def test_bad_contiguity(self):
        with pytest.raises(ConstructError, match="contiguity"):
            region_adjacency_graph(grid_partition(1, 2), "bishop")

    @pytest.mark.parametrize("a", [1, 2, 3, 4])
    @pytest.mark.parametrize("b", [1, 2, 3, 4])
    def test_grid_edge_counts(self, a, b):
        p = grid_partition(a, b)
        queen = edge_set(region_adjacency_graph(p, "queen"))
        rook = edge_set(region_adjacency_graph(p, "rook"))
        assert len(rook) == 2 * a * b - a - b
        assert len(queen) == 2 * a * b - a - b + 2 * (a - 1) * (b - 1)
        assert rook <= queen

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ConstructError, match="duplicate"):
            Partition.from_polygons([("a", square(0, 0)), ("a", square(1, 0))])


class TestODGraph:
    def test_self_loops_excluded_by_default(self):
        m = ODMatrix.from_dense(["a", "b"], [[5, 2], [0, 7]])
        g = od_graph(m)
        assert g.directed and g.n_edges == 1
        assert g.dense().tolist() == [[0, 2], [0, 0]]

    def test_self_loops_included(self):
        m = ODMatrix.from_dense(["a", "b"], [[5, 2], [0, 7]])
        assert od_graph(m, include_self_loops=True).n_edges == 3

    def test_negative_flow_rejected(self):
        m = ODMatrix.from_dense(["a", "b"], [[0, -1], [1, 0]])
        with pytest.raises(ConstructError, match="negative flow"):
            od_graph(m)

    def test_isolated_regions_retained(self):
        m = ODMatrix.from_dense(["a", "b", "c"], [[0, 3, 0], [0, 0, 0], [0, 0, 0]])
        g = od_graph(m)
        assert g.labels == ("a", "b", "c")

    def test_shape_mismatch(self):
        with pytest.raises(ConstructError):
            ODMatrix(("a",), sp.csr_matrix(np.ones((2, 2))))

    def test_csv_round_trip(self, tmp_path):
        m = ODMatrix.from_dense(["x", "y", "z"], [[0, 1.5, 0], [2, 0, 3], [0, 0, 0]])
        path = tmp_path / "od.csv"
        write_od_csv(m, path)
        ids = tmp_path / "ids.txt"
        ids.write_text("x\ny\nz\n")
        back = read_od_csv(path, ids)
        assert back.ids == m.ids
        assert np.array_equal(back.flows.toarray(), m.flows.toarray())

    def test_csv_duplicate_pair(self, tmp_path):
        path = tmp_path / "od.csv"
        path.write_text("origin,destination,flow\na,b,1\na,b,2\n")
        with pytest.raises(ConstructError, match="duplicate"):
            read_od_csv(path)


class TestGeoJSON:
    def test_read_polygons_and_multipolygons(self, tmp_path):
        doc = {
            "type": "FeatureCollection",
            "features": [
                {"type": "Feature", "properties": {"id": "a", "population": 10},
                 "geometry": {"type": "Polygon", "coordinates": square(0, 0)}},
                {"type": "Feature", "properties": {"id": "b"},
                 "geometry": {"type": "MultiPolygon", "coordinates": [square(1, 0), square(5, 5)]}},
            ],
        }
        path = tmp_path / "p.geojson"
        path.write_text(json.dumps(doc))
        p = read_partition_geojson(path)
        assert p.ids == ("a", "b")
        assert p.regions[0].population == 10
        g = region_adjacency_graph(p, "rook")
        assert g.n_edges == 1
        # area-weighted centroid over both parts
        assert np.allclose(g.coords[1], ((1.5 + 5.5) / 2, (0.5 + 5.5) / 2))

    def test_missing_id(self):
        from mobgraph.construct import partition_from_geojson

        doc = {"type": "FeatureCollection", "features": [{"properties": {}, "geometry": None}]}
        with pytest.raises(ConstructError, match="no 'id'"):
            partition_from_geojson(doc)
