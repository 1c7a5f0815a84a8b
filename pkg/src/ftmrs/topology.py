"""Deployment, connectivity, head election and load-bounded clustering."""
from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from . import kernels
from .core import EnergyParams, NodeRole, NodeState, Position
from .energy import single_hop_energy

log = logging.getLogger(__name__)


def deploy(node_count, area, standby_fraction=0.0, seed=0, initial_energy=0.5):
    """Scatter ``node_count`` nodes uniformly over ``area`` = (width, height).

    Coordinates are drawn as (x, y) pairs, so for a fixed seed a larger
    deployment extends a smaller one node by node.
    """
    width, height = area
    if node_count < 1:
        raise ValueError("node_count must be at least 1")
    if width <= 0 or height <= 0:
        raise ValueError("area dimensions must be positive")
    if not 0.0 <= standby_fraction < 1.0:
        raise ValueError("standby_fraction must lie in [0, 1)")
    unit = np.random.default_rng(seed).random((node_count, 2))
    xs = unit[:, 0] * width
    ys = unit[:, 1] * height
    n_standby = math.floor(node_count * standby_fraction)
    spares = set(np.random.default_rng([seed, 1]).permutation(node_count)[:n_standby].tolist())
    return [
        NodeState(
            id=i,
            pos=Position(float(xs[i]), float(ys[i])),
            energy=float(initial_energy),
            role=NodeRole.STANDBY if i in spares else NodeRole.NORMAL,
        )
        for i in range(node_count)
    ]


# static neighbour structure keyed by geometry; fault-free and faulty twins of
# one deployment share it
_CSR_CACHE = {}
_CSR_CACHE_SIZE = 4


class NetworkGraph:
    """Unit-disk connectivity over the deployed nodes plus the base station.

    Positions never change, so the full neighbour structure is computed once
    as CSR arrays. Deaths, spares and relay restrictions are expressed through
    the per-vertex ``state`` array, refreshed from node roles by ``refresh``.
    The base station is vertex ``len(nodes)`` when present.
    """

    def __init__(self, nodes, radio_range, bs_pos=None, params=EnergyParams(), bs_range=None):
        if radio_range <= 0:
            raise ValueError("radio_range must be positive")
        self.nodes = nodes
        self.radio_range = float(radio_range)
        # uplink reach to the sink; defaults to the node-to-node range
        self.bs_range = self.radio_range if bs_range is None else float(bs_range)
        if self.bs_range <= 0:
            raise ValueError("bs_range must be positive")
        self.params = params
        self.bs_pos = bs_pos
        self.bs = len(nodes) if bs_pos is not None else None
        pts = [(n.pos.x, n.pos.y) for n in nodes]
        if bs_pos is not None:
            pts.append((bs_pos.x, bs_pos.y))
        self.points = np.asarray(pts, dtype=float).reshape(-1, 2)
        self.size = len(self.points)
        self._build_csr()
        self.state = np.zeros(self.size, dtype=np.uint8)
        self._weights = {}
        self.refresh()

    def _build_csr(self):
        key = (hashlib.sha1(self.points.tobytes()).hexdigest(), self.size, self.radio_range,
               self.bs_range, self.bs)
        cached = _CSR_CACHE.get(key)
        if cached is None:
            cached = self._static_csr()
            for arr in cached:
                arr.flags.writeable = False
            _CSR_CACHE[key] = cached
            while len(_CSR_CACHE) > _CSR_CACHE_SIZE:
                _CSR_CACHE.pop(next(iter(_CSR_CACHE)))
        self.edges, self.edge_dist, self.indices, self.edge_of, self.entry_dist, self.indptr = cached
        self._edge_index = None

    def _static_csr(self):
        n = self.size
        m = len(self.nodes)
        if m > 1:
            tree = cKDTree(self.points[:m])
            # loose query, then the exact closed threshold below
            pairs = tree.query_pairs(self.radio_range * (1 + 1e-9) + 1e-9, output_type="ndarray")
        else:
            pairs = np.empty((0, 2), dtype=np.int64)
        if len(pairs):
            d = self.points[pairs[:, 0]] - self.points[pairs[:, 1]]
            dist = np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1])
            keep = dist <= self.radio_range
            pairs, dist = pairs[keep], dist[keep]
        else:
            dist = np.empty(0)
        if self.bs is not None and m:
            d = self.points[:m] - self.points[self.bs]
            bd = np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1])
            near = np.flatnonzero(bd <= self.bs_range)
            bs_pairs = np.column_stack([near, np.full(len(near), self.bs)])
            pairs = np.concatenate([pairs.reshape(-1, 2), bs_pairs]).astype(np.int64)
            dist = np.concatenate([dist, bd[near]])
        pairs = pairs.reshape(-1, 2).astype(np.int64)
        # sparse matrices give the canonical (u, v) edge order and the CSR
        # layout with C-level counting sorts; data holds edge id + 1
        upper = sparse.csr_matrix(
            (np.arange(1, len(pairs) + 1), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
        upper.sort_indices()
        perm = upper.data - 1
        pairs, dist = pairs[perm], dist[perm]
        upper.data = np.arange(1, len(pairs) + 1)
        full = (upper + upper.T).tocsr()
        full.sort_indices()
        eid = full.data.astype(np.int64) - 1
        return (
            pairs,
            dist,
            np.ascontiguousarray(full.indices, dtype=np.int64),
            np.ascontiguousarray(eid),
            np.ascontiguousarray(dist[eid]),
            np.ascontiguousarray(full.indptr, dtype=np.int64),
        )

    def refresh(self, ids=None):
        for n in (self.nodes if ids is None else (self.nodes[i] for i in ids)):
            if n.role in (NodeRole.DEAD, NodeRole.STANDBY):
                self.state[n.id] = kernels.EXCLUDED
            elif n.role is NodeRole.END:
                self.state[n.id] = kernels.ENDPOINT
            else:
                self.state[n.id] = kernels.RELAY
        if self.bs is not None:
            # the sink absorbs traffic but never relays it
            self.state[self.bs] = kernels.ENDPOINT

    def weights(self, size_bits):
        w = self._weights.get(size_bits)
        if w is None:
            w = np.array([single_hop_energy(float(d), size_bits, self.params) for d in self.entry_dist])
            self._weights[size_bits] = w
        return w

    def is_present(self, v) -> bool:
        return self.state[v] != kernels.EXCLUDED

    def distance(self, u, v) -> float:
        d = self.points[u] - self.points[v]
        return math.sqrt(d[0] * d[0] + d[1] * d[1])

    def edge_id(self, u, v):
        if self._edge_index is None:
            # built on first use; dense deployments have around a million edges
            self._edge_index = {pair: i for i, pair in enumerate(map(tuple, self.edges.tolist()))}
        return self._edge_index.get((u, v) if u < v else (v, u))

    def neighbors(self, u):
        """Present neighbours of ``u`` with link distances."""
        lo, hi = self.indptr[u], self.indptr[u + 1]
        out = []
        for e in range(lo, hi):
            v = int(self.indices[e])
            if self.state[v] != kernels.EXCLUDED:
                out.append((v, float(self.entry_dist[e])))
        return out

    def all_neighbors(self, u):
        """Static neighbours regardless of role (spares and the dead included)."""
        lo, hi = self.indptr[u], self.indptr[u + 1]
        return [int(v) for v in self.indices[lo:hi]]

    @property
    def adjacency(self):
        return {
            n.id: self.neighbors(n.id)
            for n in self.nodes
            if self.state[n.id] != kernels.EXCLUDED
        }

    def hops_from(self, src):
        return kernels.bfs_hops(self.indptr, self.indices, self.state, src)

    def avg_link_range(self) -> float:
        if not len(self.edges):
            return 0.0
        present = self.state != kernels.EXCLUDED
        keep = present[self.edges[:, 0]] & present[self.edges[:, 1]]
        if not keep.any():
            return 0.0
        return float(self.edge_dist[keep].mean())


def build_graph(nodes, radio_range, bs_pos=None, params=EnergyParams(), bs_range=None):
    return NetworkGraph(nodes, radio_range, bs_pos, params, bs_range)


def elect_heads(graph, target_cluster_count, separation_radius=None, candidates=None, events=None):
    """Greedy energy-descending head choice with a minimum spacing.

    When fewer than ``target_cluster_count`` heads fit, the spacing is halved
    and the pass repeated; each relaxation is logged and appended to
    ``events`` if given.
    """
    if candidates is None:
        candidates = [
            n for n in graph.nodes
            if n.role in (NodeRole.NORMAL, NodeRole.TRAFFIC) and n.energy > 0
        ]
    else:
        candidates = [graph.nodes[i] for i in candidates]
    if target_cluster_count < 1 or target_cluster_count > len(candidates):
        raise ValueError("target_cluster_count must lie in [1, eligible nodes]")
    if separation_radius is None:
        xs, ys = graph.points[:, 0], graph.points[:, 1]
        area = max(np.ptp(xs) * np.ptp(ys), 1.0)
        separation_radius = 0.5 * math.sqrt(area / target_cluster_count)
    ranked = sorted(candidates, key=lambda n: (-n.energy, n.id))
    radius = float(separation_radius)
    while True:
        heads = []
        for n in ranked:
            if all(n.pos.distance(h.pos) >= radius for h in heads):
                heads.append(n)
                if len(heads) == target_cluster_count:
                    return [h.id for h in heads]
        log.debug("head separation %.3f m infeasible, halving", radius)
        if events is not None:
            events.append(("relax_separation", radius))
        radius = radius / 2 if radius > 1e-6 else 0.0


@dataclass
class Cluster:
    head: int
    members: list[int] = field(default_factory=list)
    standbys: list[int] = field(default_factory=list)
    over_budget: bool = False

    @property
    def load(self) -> int:
        # packets the head handles per round: one per member plus its aggregate
        return len(self.members) + 1


@dataclass
class Clustering:
    clusters: list[Cluster]
    unclustered: list[int]
    head_of: dict[int, int]

    def __iter__(self):
        return iter(self.clusters)

    def __len__(self):
        return len(self.clusters)

    def by_head(self, head):
        for c in self.clusters:
            if c.head == head:
                return c
        return None


def default_load_budget(residual_energy, rounds_target, avg_link_range, packet_bits, params=EnergyParams()):
    """Packets per round a head can absorb and still last ``rounds_target`` rounds."""
    per_packet = single_hop_energy(avg_link_range, packet_bits, params)
    if rounds_target <= 0 or per_packet <= 0:
        return math.inf
    return math.floor(residual_energy / (rounds_target * per_packet))


def form_clusters(graph, heads, load_budget=math.inf, members=None):
    """Attach every present non-head node to a head.

    Preference is by hop count, then euclidean distance, then head id. A head
    accepts a node only while ``members + 1 <= load_budget`` would still hold
    afterwards; a node no head can take goes to its nearest head anyway and
    that cluster is flagged over budget. Nodes with no reachable head end up
    in ``unclustered``.
    """
    if not heads:
        raise ValueError("heads must be non-empty")
    heads = list(heads)
    head_set = set(heads)
    hop_rows = {h: graph.hops_from(h) for h in heads}
    if members is None:
        members = [
            n.id for n in graph.nodes
            if graph.is_present(n.id) and n.id not in head_set and n.energy > 0
        ]
    prefs = {}
    unclustered = []
    for v in members:
        options = []
        for h in heads:
            hops = int(hop_rows[h][v])
            if hops > 0:
                options.append((hops, graph.distance(v, h), h))
        if options:
            options.sort()
            prefs[v] = options
        else:
            unclustered.append(v)
    clusters = {h: Cluster(h) for h in heads}
    for v in sorted(prefs, key=lambda v: (prefs[v][0][0], prefs[v][0][1], v)):
        for _, _, h in prefs[v]:
            if len(clusters[h].members) + 2 <= load_budget:
                clusters[h].members.append(v)
                break
        else:
            h = prefs[v][0][2]
            clusters[h].members.append(v)
            clusters[h].over_budget = True
    for n in graph.nodes:
        if n.role is NodeRole.STANDBY:
            h = min(heads, key=lambda h: (n.pos.distance(graph.nodes[h].pos), h))
            clusters[h].standbys.append(n.id)
    head_of = {}
    for h in heads:
        clusters[h].members.sort()
        head_of[h] = h
        for v in clusters[h].members:
            head_of[v] = h
    return Clustering([clusters[h] for h in heads], sorted(unclustered), head_of)
