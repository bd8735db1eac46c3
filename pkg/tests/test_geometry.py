"""Voronoi construction, nearest-site lookup, tours and path parameterisation."""
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rfcharge.errors import DuplicateSites, InvalidVertex, SiteOutsideRegion, TooFewSites
from rfcharge.geometry import (Path, Region, build_voronoi, distance_matrix, incident_edge_indices,
                               incident_edges, nearest_neighbor_order, nearest_site, nearest_sites,
                               point_along_path, tour_length, tsp_order, tsp_tour, two_opt)


def random_sites(seed, n, side=100.0):
    return np.random.default_rng(seed).uniform(0, side, size=(n, 2))


def exhaustive_nearest(sites, q):
    best, best_d = 0, math.inf
    for i, s in enumerate(sites):
        d = (s[0] - q[0]) ** 2 + (s[1] - q[1]) ** 2
        if d < best_d:
            best, best_d = i, d
    return best


def grid_points(side, n):
    c = (np.arange(n) + 0.5) * side / n
    xx, yy = np.meshgrid(c, c)
    return np.column_stack([xx.ravel(), yy.ravel()])


def point_in_polygon(p, poly):
    # winding-free crossing test, good enough for convex cells
    x, y = p
    inside = False
    n = len(poly)
    for k in range(n):
        (x1, y1), (x2, y2) = poly[k], poly[(k + 1) % n]
        if (y1 > y) != (y2 > y) and x < x1 + (y - y1) * (x2 - x1) / (y2 - y1):
            inside = not inside
    return inside


class TestRegion:
    def test_area_and_contains(self):
        r = Region(10.0)
        assert r.area == 100.0
        assert r.contains((0.0, 10.0)) and not r.contains((10.1, 5.0))
        assert r.distance_to_boundary((3.0, 6.0)) == pytest.approx(3.0)

    def test_non_positive_side(self):
        with pytest.raises(ValueError):
            Region(0.0)


class TestVoronoi:
    def test_single_site(self):
        d = build_voronoi([(3.0, 4.0)], Region(10.0))
        assert d.cell_area(0) == pytest.approx(100.0)
        assert d.inner_vertices == () and d.edges == ()

    def test_two_sites_bisector(self):
        s = 8.0
        d = build_voronoi([(s / 4, s / 2), (3 * s / 4, s / 2)], Region(s))
        assert d.inner_vertices == ()
        assert len(d.edges) == 1
        a, b = d.edges[0]
        np.testing.assert_allclose(d.vertices[[a, b], 0], [s / 2, s / 2], atol=1e-12)
        assert d.cell_area(0) == pytest.approx(s * s / 2)

    def test_four_square_sites_share_centre(self):
        d = build_voronoi([(2.5, 2.5), (7.5, 2.5), (2.5, 7.5), (7.5, 7.5)], Region(10.0))
        assert len(d.inner_vertices) == 1
        v = d.inner_vertices[0]
        np.testing.assert_allclose(d.vertices[v], [5.0, 5.0], atol=1e-9)
        assert len(incident_edges(d, v)) == 4

    @pytest.mark.parametrize("seed", range(5))
    def test_partition(self, seed):
        d = build_voronoi(random_sites(seed, 12), Region(100.0))
        total = sum(d.cell_area(i) for i in range(12))
        assert total == pytest.approx(1e4, rel=1e-6)

    def test_grid_oracle_seed_42(self):
        sites = random_sites(42, 4)
        d = build_voronoi(sites, Region(100.0))
        pts = grid_points(100.0, 100)
        assert all(nearest_site(d, q) == exhaustive_nearest(sites, q) for q in pts)
        # the clipped cell polygons agree with the same oracle
        for q in pts[::37]:
            owner = exhaustive_nearest(sites, q)
            assert point_in_polygon(q, d.cells[owner])

    @pytest.mark.parametrize("seed", range(4))
    def test_inner_vertices_equidistant(self, seed):
        sites = random_sites(seed, 15)
        d = build_voronoi(sites, Region(100.0))
        assert d.inner_vertices
        for v in d.inner_vertices:
            dist = np.sort(np.hypot(*(sites - d.vertices[v]).T))
            assert dist[2] - dist[0] < 1e-6
            assert len(incident_edges(d, v)) == 3

    def test_cell_points_closest_to_own_site(self):
        sites = random_sites(3, 9)
        d = build_voronoi(sites, Region(100.0))
        for i, cell in enumerate(d.cells):
            for corner in cell:
                dd = np.hypot(*(sites - corner).T)
                assert dd[i] <= dd.min() + 1e-7

    def test_errors(self):
        with pytest.raises(DuplicateSites):
            build_voronoi([(1.0, 1.0), (1.0, 1.0)], Region(10.0))
        with pytest.raises(SiteOutsideRegion):
            build_voronoi([(1.0, 1.0), (11.0, 1.0)], Region(10.0))
        with pytest.raises(TooFewSites):
            build_voronoi([], Region(10.0))

    def test_deterministic(self):
        a = build_voronoi(random_sites(5, 20), Region(100.0))
        b = build_voronoi(random_sites(5, 20), Region(100.0))
        assert np.array_equal(a.vertices, b.vertices) and a.edges == b.edges


class TestNearestSite:
    def test_own_site(self):
        sites = random_sites(1, 6)
        d = build_voronoi(sites, Region(100.0))
        assert [nearest_site(d, s) for s in sites] == list(range(6))

    def test_tie_goes_to_lowest_index(self):
        sites = [(1.0, 1.0), (2.0, 5.0), (9.0, 9.0), (8.0, 5.0)]
        d = build_voronoi(sites, Region(10.0))
        assert nearest_site(d, (5.0, 5.0)) == 1

    def test_linear_scan_oracle(self):
        sites = random_sites(10, 10)
        d = build_voronoi(sites, Region(100.0))
        q = np.random.default_rng(11).uniform(0, 100, size=(1000, 2))
        expected = [exhaustive_nearest(sites, p) for p in q]
        assert [nearest_site(d, p) for p in q] == expected
        assert list(nearest_sites(sites, q)) == expected


class TestIncidentEdges:
    def test_boundary_vertex_has_an_edge(self):
        d = build_voronoi(random_sites(2, 10), Region(100.0))
        boundary = [v for v in range(len(d.vertices)) if v not in d.inner_vertices]
        assert boundary
        assert all(len(incident_edges(d, v)) >= 1 for v in boundary)

    def test_union_covers_every_edge(self):
        d = build_voronoi(random_sites(4, 10), Region(100.0))
        found = set()
        for v in range(len(d.vertices)):
            found.update(incident_edge_indices(d, v))
        assert found == set(range(len(d.edges)))

    def test_sorted(self):
        d = build_voronoi(random_sites(4, 10), Region(100.0))
        for v in d.inner_vertices:
            idx = incident_edge_indices(d, v)
            assert idx == sorted(idx)

    def test_invalid_vertex(self):
        d = build_voronoi(random_sites(4, 5), Region(100.0))
        with pytest.raises(InvalidVertex):
            incident_edges(d, len(d.vertices))
        with pytest.raises(InvalidVertex):
            incident_edge_indices(d, -1)


def brute_force_tour(dist):
    n = len(dist)
    best = math.inf
    for perm in itertools.permutations(range(1, n)):
        best = min(best, tour_length((0,) + perm, dist))
    return best


class TestTour:
    def test_two_sites(self):
        t = tsp_tour([(0.0, 0.0), (3.0, 4.0)])
        assert t.closed and t.total_length == pytest.approx(10.0)

    def test_square(self):
        t = tsp_tour([(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)])
        assert t.total_length == pytest.approx(4.0)

    def test_eight_sites_seed_7(self):
        sites = random_sites(7, 8)
        dist = distance_matrix(sites)
        order = tsp_order(sites)
        assert sorted(order) == list(range(8))
        assert tour_length(order, dist) <= 1.05 * brute_force_tour(dist)

    @pytest.mark.parametrize("seed", range(6))
    def test_two_opt_never_worsens_and_is_stable(self, seed):
        sites = random_sites(seed, 15)
        dist = distance_matrix(sites)
        nn = nearest_neighbor_order(dist)
        order = tsp_order(sites)
        assert tour_length(order, dist) <= tour_length(nn, dist) + 1e-12
        assert two_opt(order, dist) == order

    def test_too_few(self):
        with pytest.raises(TooFewSites):
            tsp_tour([(1.0, 1.0)])


class TestPath:
    def test_start(self):
        p = Path([(1.0, 2.0), (4.0, 6.0)], closed=False)
        assert point_along_path(p, 0.0) == (1.0, 2.0)

    def test_open_reflection(self):
        p = Path([(0.0, 0.0), (10.0, 0.0)], closed=False)
        x, y = point_along_path(p, 15.0)
        assert (x, y) == pytest.approx((5.0, 0.0))
        assert point_along_path(p, 20.0) == pytest.approx((0.0, 0.0))

    def test_closed_modular(self):
        sq = Path([(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)], closed=True)
        assert sq.total_length == pytest.approx(40.0)
        assert point_along_path(sq, 95.0) == pytest.approx(point_along_path(sq, 15.0))
        assert point_along_path(sq, 15.0) == pytest.approx((10.0, 5.0))

    def test_bad_paths(self):
        with pytest.raises(ValueError):
            Path([(0.0, 0.0)], closed=False)
        with pytest.raises(ValueError):
            Path([(0.0, 0.0), (0.0, 0.0)], closed=False)
        with pytest.raises(ValueError):
            point_along_path(Path([(0.0, 0.0), (1.0, 0.0)], closed=False), -1.0)

    @settings(max_examples=200)
    @given(st.floats(0, 500), st.floats(1e-6, 5), st.booleans())
    def test_lipschitz(self, s, eps, closed):
        p = Path([(0.0, 0.0), (7.0, 1.0), (3.0, 9.0), (-2.0, 4.0)], closed=closed)
        a = np.array(p.point_at(s))
        b = np.array(p.point_at(s + eps))
        assert np.linalg.norm(b - a) <= eps + 1e-9

    def test_vectorised_matches_scalar(self):
        p = Path(random_sites(0, 6, 10.0), closed=True)
        arcs = np.linspace(0, 3 * p.total_length, 50)
        np.testing.assert_allclose(p.positions(arcs), [p.point_at(a) for a in arcs], atol=1e-12)
