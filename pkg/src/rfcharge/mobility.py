"""Actor deployment for the centre-to-centre (CM) and around-edges (EM)
mobility models, static and mobile."""
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import NoActors, NoInnerVertices
from .geometry import Path, incident_edge_indices, tsp_order


class MobilityModel(str, Enum):
    STATIC_EM = "static_em"
    MOBILE_EM = "mobile_em"
    STATIC_CM = "static_cm"
    MOBILE_CM = "mobile_cm"

    @property
    def mobile(self):
        return self in (MobilityModel.MOBILE_EM, MobilityModel.MOBILE_CM)

    @property
    def edge_based(self):
        return self in (MobilityModel.STATIC_EM, MobilityModel.MOBILE_EM)

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown mobility model {value!r}; expected one of "
                             f"{', '.join(m.value for m in cls)}") from None


ALL_MODELS = tuple(MobilityModel)


@dataclass(eq=False)
class DeploymentPlan:
    """Initial actor positions and, for mobile actors, the path each one
    follows and its arc position on it.

    ``slot_of`` records the edge, branch or event point each actor was
    placed on; ``counts`` tallies actors per such slot.
    """
    positions: np.ndarray
    paths: list
    offsets: np.ndarray
    slot_of: np.ndarray
    counts: np.ndarray
    anchors: Optional[np.ndarray] = None

    @property
    def n_actors(self):
        return len(self.positions)

    @property
    def mobile(self):
        return any(p is not None for p in self.paths)


def _round_robin(n_actors, n_slots):
    slot_of = np.arange(n_actors) % n_slots
    counts = np.bincount(slot_of, minlength=n_slots)
    # rank of each actor among those sharing its slot, starting at 1
    rank = np.arange(n_actors) // n_slots + 1
    return slot_of, counts, rank


def deploy_cm(eps, tour, n_actors, mobile=True):
    """CM deployment over a closed tour through the event points.

    Mobile: actors spread round-robin over the tour edges, equally spaced on
    each edge, and all follow the whole tour. Static: actors sit on the
    event points themselves, handed out round-robin.
    """
    if n_actors < 1:
        raise NoActors("need at least one actor")
    eps = np.asarray(eps, dtype=float).reshape(-1, 2)
    if not mobile:
        slot_of, counts, _ = _round_robin(n_actors, len(eps))
        return DeploymentPlan(
            positions=eps[slot_of].copy(),
            paths=[None] * n_actors,
            offsets=np.zeros(n_actors),
            slot_of=slot_of,
            counts=counts,
        )
    n_edges = len(tour.waypoints)
    slot_of, counts, rank = _round_robin(n_actors, n_edges)
    lengths = tour.segment_lengths
    offsets = np.array([tour.segment_start(e) + j * lengths[e] / (counts[e] + 1)
                        for e, j in zip(slot_of, rank)])
    positions = tour.positions(offsets)
    return DeploymentPlan(
        positions=positions,
        paths=[tour] * n_actors,
        offsets=offsets,
        slot_of=slot_of,
        counts=counts,
    )


def em_branches(diagram):
    """Edges used as EM branches, each with the inner vertex it hangs from.

    Inner vertices are visited in index order and claim their incident edges
    that are not yet claimed, so every edge touching an inner vertex becomes
    exactly one branch.
    """
    inner = diagram.inner_vertices
    if not inner:
        raise NoInnerVertices("the tessellation has no vertex inside the region")
    branches, claimed = [], set()
    for v in inner:
        for e in incident_edge_indices(diagram, v):
            if e not in claimed:
                claimed.add(e)
                branches.append((e, v))
    return branches


def patrol_path(diagram, anchor):
    """Star walk out and back along every edge at ``anchor``: anchor, far end
    of edge 1, anchor, far end of edge 2, ... Walked back and forth."""
    waypoints = [diagram.vertices[anchor]]
    for e in incident_edge_indices(diagram, anchor):
        a, b = diagram.edges[e]
        far = b if a == anchor else a
        if len(waypoints) > 1:
            waypoints.append(diagram.vertices[anchor])
        waypoints.append(diagram.vertices[far])
    return Path(np.array(waypoints), closed=False)


def _arc_on_patrol(diagram, anchor, edge, dist_from_anchor):
    # the patrol leaves the anchor along each incident edge in index order and
    # walks every earlier edge out and back first
    s = 0.0
    for e in incident_edge_indices(diagram, anchor):
        if e == edge:
            return s + dist_from_anchor
        s += 2.0 * diagram.edge_length(e)
    raise ValueError(f"edge {edge} does not touch vertex {anchor}")


def deploy_em(diagram, n_actors, mobile=True):
    """EM deployment.

    Actors are first dealt to inner Voronoi corners round-robin, then
    redistributed round-robin over the branches so branch loads differ by at
    most one, and finally spaced evenly along their branch starting from its
    anchor corner.
    """
    if n_actors < 1:
        raise NoActors("need at least one actor")
    branches = em_branches(diagram)
    slot_of, counts, rank = _round_robin(n_actors, len(branches))
    positions, paths, offsets, anchors = [], [], [], []
    patrols = {}
    for b, j in zip(slot_of, rank):
        edge, anchor = branches[b]
        length = diagram.edge_length(edge)
        d = j * length / (counts[b] + 1)
        a, c = diagram.edges[edge]
        far = c if a == anchor else a
        start, end = diagram.vertices[anchor], diagram.vertices[far]
        positions.append(start + (end - start) * (d / length))
        anchors.append(anchor)
        if mobile:
            if anchor not in patrols:
                patrols[anchor] = patrol_path(diagram, anchor)
            paths.append(patrols[anchor])
            offsets.append(_arc_on_patrol(diagram, anchor, edge, d))
        else:
            paths.append(None)
            offsets.append(0.0)
    return DeploymentPlan(
        positions=np.array(positions),
        paths=paths,
        offsets=np.array(offsets),
        slot_of=slot_of,
        counts=counts,
        anchors=np.array(anchors),
    )


def build_plan(model, eps, diagram, n_actors):
    model = MobilityModel.parse(model)
    if model.edge_based:
        return deploy_em(diagram, n_actors, mobile=model.mobile)
    eps = np.asarray(eps, dtype=float).reshape(-1, 2)
    if len(eps) < 2:
        # a single event point has no tour; every actor parks on it
        return deploy_cm(eps, None, n_actors, mobile=False)
    tour = Path(eps[tsp_order(eps)], closed=True)
    return deploy_cm(eps, tour, n_actors, mobile=model.mobile)
