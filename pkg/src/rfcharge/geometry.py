"""Planar geometry: bounded Voronoi cells, TSP tours and arc-length paths.

Cells are built by clipping the square region with the bisector half-plane
of every other site. With at most a few dozen event points the O(n^2) cost
is irrelevant and the clipping handles the region boundary for free.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DuplicateSites, InvalidVertex, SiteOutsideRegion, TooFewSites

SITE_TOL = 1e-9      # minimum separation between two sites
BOUNDARY_TOL = 1e-9  # vertices closer than this to the border are not inner
MERGE_TOL = 1e-7     # vertex welding tolerance between neighbouring cells
BOUNDARY = -1        # edge label for a polygon side lying on the region border


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Region:
    """Axis-aligned square ``[0, side] x [0, side]``."""
    side: float

    def __post_init__(self):
        if not (self.side > 0 and math.isfinite(self.side)):
            raise ValueError(f"region side must be positive, got {self.side}")

    @property
    def area(self):
        return self.side * self.side

    def contains(self, p, tol=0.0):
        x, y = p
        return -tol <= x <= self.side + tol and -tol <= y <= self.side + tol

    def distance_to_boundary(self, p):
        x, y = p
        return min(x, y, self.side - x, self.side - y)

    def polygon(self):
        s = self.side
        return np.array([[0.0, 0.0], [s, 0.0], [s, s], [0.0, s]])


def polygon_area(poly):
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _clip(poly, labels, site, other, other_idx):
    """Keep the part of convex ``poly`` at least as close to ``site`` as to
    ``other``. ``labels[k]`` tags side k -> k+1 with the neighbour whose
    bisector produced it (or BOUNDARY)."""
    normal = other - site
    offset = np.dot(normal, (site + other) / 2.0)
    scale = np.linalg.norm(normal) * max(1.0, np.abs(poly).max())
    side = poly @ normal - offset
    inside = side <= 1e-12 * scale
    if inside.all():
        return poly, labels
    out, out_labels = [], []
    n = len(poly)
    for k in range(n):
        cur, nxt = poly[k], poly[(k + 1) % n]
        f0, f1 = side[k], side[(k + 1) % n]
        if inside[k]:
            out.append(cur)
            out_labels.append(labels[k])
            if not inside[(k + 1) % n]:
                t = f0 / (f0 - f1)
                out.append(cur + t * (nxt - cur))
                out_labels.append(other_idx)
        elif inside[(k + 1) % n]:
            t = f0 / (f0 - f1)
            out.append(cur + t * (nxt - cur))
            out_labels.append(labels[k])
    if not out:
        return np.empty((0, 2)), []
    return _drop_repeats(np.array(out), out_labels)


def _drop_repeats(poly, labels):
    # dropping the first vertex of a coincident pair keeps the labels of the
    # surviving sides correct
    keep = []
    n = len(poly)
    for k in range(n):
        if np.linalg.norm(poly[k] - poly[(k + 1) % n]) > MERGE_TOL:
            keep.append(k)
    return poly[keep], [labels[k] for k in keep]


@dataclass(frozen=True, eq=False)
class VoronoiDiagram:
    sites: np.ndarray
    region: Region
    cells: tuple
    vertices: np.ndarray
    edges: tuple          # (vertex_a, vertex_b), a < b
    edge_sites: tuple     # the two sites each edge separates
    inner_vertices: tuple
    cell_labels: tuple = field(repr=False, default=())

    def cell_area(self, i):
        cell = self.cells[i]
        return polygon_area(cell) if len(cell) >= 3 else 0.0

    def edge_length(self, e):
        a, b = self.edges[e]
        return float(np.linalg.norm(self.vertices[a] - self.vertices[b]))


def _as_array(points):
    arr = np.asarray([tuple(p) for p in points], dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(arr)):
        raise ValueError("coordinates must be finite")
    return arr


def build_voronoi(sites, region):
    """Voronoi tessellation of ``sites`` clipped to ``region``."""
    pts = _as_array(sites)
    if len(pts) < 1:
        raise TooFewSites("need at least one site")
    for i, p in enumerate(pts):
        if not region.contains(p):
            raise SiteOutsideRegion(f"site {i} at {tuple(p)} lies outside the region")
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff ** 2).sum(-1))
    np.fill_diagonal(dist, np.inf)
    if len(pts) > 1 and dist.min() < SITE_TOL:
        i, j = np.unravel_index(np.argmin(dist), dist.shape)
        raise DuplicateSites(f"sites {min(i, j)} and {max(i, j)} coincide")

    cells, cell_labels = [], []
    for i, p in enumerate(pts):
        poly = region.polygon()
        labels = [BOUNDARY] * 4
        for j in np.argsort(dist[i], kind="stable"):
            if j == i or len(poly) == 0:
                continue
            poly, labels = _clip(poly, labels, p, pts[j], int(j))
        cells.append(poly)
        cell_labels.append(tuple(labels))

    vertices = []

    def vertex_id(q):
        for k, v in enumerate(vertices):
            if abs(v[0] - q[0]) <= MERGE_TOL and abs(v[1] - q[1]) <= MERGE_TOL:
                return k
        vertices.append((float(q[0]), float(q[1])))
        return len(vertices) - 1

    edges, edge_sites, seen = [], [], set()
    for i, (poly, labels) in enumerate(zip(cells, cell_labels)):
        n = len(poly)
        for k, j in enumerate(labels):
            if j == BOUNDARY or j < i:
                continue
            a = vertex_id(poly[k])
            b = vertex_id(poly[(k + 1) % n])
            if a == b:
                continue
            key = (min(a, b), max(a, b))
            if key in seen:
                continue
            seen.add(key)
            edges.append(key)
            edge_sites.append((i, j))

    verts = np.array(vertices, dtype=float).reshape(-1, 2)
    inner = tuple(k for k, v in enumerate(verts) if region.distance_to_boundary(v) > BOUNDARY_TOL)
    return VoronoiDiagram(
        sites=pts,
        region=region,
        cells=tuple(cells),
        vertices=verts,
        edges=tuple(edges),
        edge_sites=tuple(edge_sites),
        inner_vertices=inner,
        cell_labels=tuple(cell_labels),
    )


def nearest_site(diagram, p):
    """Index of the site closest to ``p``; ties go to the lowest index."""
    d2 = ((diagram.sites - np.asarray(p, dtype=float)) ** 2).sum(axis=1)
    return int(np.argmin(d2))


def nearest_sites(sites, points):
    """Vectorised nearest-site lookup for an (m, 2) array of query points."""
    sites = np.asarray(sites, dtype=float)
    points = np.asarray(points, dtype=float)
    d2 = ((points[:, None, :] - sites[None, :, :]) ** 2).sum(axis=-1)
    return np.argmin(d2, axis=1)


def incident_edges(diagram, vertex):
    if not 0 <= vertex < len(diagram.vertices):
        raise InvalidVertex(f"vertex {vertex} out of range 0..{len(diagram.vertices) - 1}")
    return [e for e in diagram.edges if vertex in e]


def incident_edge_indices(diagram, vertex):
    if not 0 <= vertex < len(diagram.vertices):
        raise InvalidVertex(f"vertex {vertex} out of range 0..{len(diagram.vertices) - 1}")
    return [k for k, e in enumerate(diagram.edges) if vertex in e]


class Path:
    """Polyline traversed at constant speed.

    A closed path loops back to its first waypoint. An open path is walked
    back and forth, so its position is periodic with period twice its length.
    """

    def __init__(self, waypoints, closed):
        wp = _as_array(waypoints)
        if len(wp) < 2:
            raise ValueError("a path needs at least two waypoints")
        seg = np.diff(np.vstack([wp, wp[:1]]) if closed else wp, axis=0)
        lengths = np.hypot(seg[:, 0], seg[:, 1])
        if np.any(lengths <= 0):
            raise ValueError("consecutive waypoints must be distinct")
        self.waypoints = wp
        self.closed = bool(closed)
        self._seg = seg
        self._cum = np.concatenate([[0.0], np.cumsum(lengths)])
        self.total_length = float(self._cum[-1])

    @property
    def segment_lengths(self):
        return np.diff(self._cum)

    def segment_start(self, k):
        """Arc length at which segment ``k`` begins."""
        return float(self._cum[k])

    def _wrap(self, s):
        s = np.asarray(s, dtype=float)
        if self.closed:
            return np.mod(s, self.total_length)
        s = np.mod(s, 2.0 * self.total_length)
        return np.where(s > self.total_length, 2.0 * self.total_length - s, s)

    def positions(self, arc):
        """Vectorised :meth:`point_at` returning an (..., 2) array."""
        s = self._wrap(arc)
        k = np.clip(np.searchsorted(self._cum, s, side="right") - 1, 0, len(self._seg) - 1)
        t = (s - self._cum[k]) / (self._cum[k + 1] - self._cum[k])
        return self.waypoints[k] + t[..., None] * self._seg[k]

    def point_at(self, arc):
        x, y = self.positions(np.asarray([arc], dtype=float))[0]
        return Point(float(x), float(y))

    def __repr__(self):
        kind = "closed" if self.closed else "open"
        return f"Path({len(self.waypoints)} waypoints, {kind}, length={self.total_length:.3f})"


def point_along_path(path, arc_length):
    if arc_length < 0:
        raise ValueError("arc length must be non-negative")
    return path.point_at(arc_length)


def distance_matrix(points):
    pts = _as_array(points)
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sqrt((diff ** 2).sum(-1))


def tour_length(order, dist):
    n = len(order)
    return float(sum(dist[order[k], order[(k + 1) % n]] for k in range(n)))


def nearest_neighbor_order(dist, start=0):
    n = len(dist)
    order, visited = [start], np.zeros(n, dtype=bool)
    visited[start] = True
    for _ in range(n - 1):
        d = np.where(visited, np.inf, dist[order[-1]])
        nxt = int(np.argmin(d))
        order.append(nxt)
        visited[nxt] = True
    return order


def two_opt(order, dist, tol=1e-12):
    """First-improvement 2-opt on a closed tour, scanned in index order until
    no exchange shortens it."""
    t = list(order)
    n = len(t)
    improved = True
    while improved:
        improved = False
        for i in range(n - 2):
            a, b = t[i], t[i + 1]
            for j in range(i + 2, n if i > 0 else n - 1):
                c, d = t[j], t[(j + 1) % n]
                delta = dist[a, c] + dist[b, d] - dist[a, b] - dist[c, d]
                if delta < -tol:
                    t[i + 1:j + 1] = reversed(t[i + 1:j + 1])
                    b = t[i + 1]
                    improved = True
    return t


def tsp_order(sites):
    pts = _as_array(sites)
    if len(pts) < 2:
        raise TooFewSites("a tour needs at least two sites")
    dist = distance_matrix(pts)
    return two_opt(nearest_neighbor_order(dist), dist)


def tsp_tour(sites):
    """Closed tour through every site: nearest neighbour then 2-opt."""
    pts = _as_array(sites)
    order = tsp_order(pts)
    return Path(pts[order], closed=True)
