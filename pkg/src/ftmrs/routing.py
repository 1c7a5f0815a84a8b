"""Energy-shortest routing with node-disjoint backups and failover."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

from . import kernels


class NoRoute(Exception):
    pass


class AllPathsDown(Exception):
    pass


class PathStatus(enum.Enum):
    USABLE = "usable"
    BUSY = "busy"
    FAULTY = "faulty"


@dataclass
class Path:
    hops: list[int]
    cost: float
    status: PathStatus = PathStatus.USABLE
    # a FAULTY path becomes usable again after this round; None holds it
    faulty_until: int | None = None
    forced: bool = False

    def __post_init__(self):
        if len(set(self.hops)) != len(self.hops):
            raise ValueError("path revisits a node")
        if self.cost < 0:
            raise ValueError("path cost must be non-negative")

    @property
    def src(self):
        return self.hops[0]

    @property
    def dst(self):
        return self.hops[-1]

    @property
    def interior(self):
        return self.hops[1:-1]

    def links(self):
        return list(zip(self.hops, self.hops[1:]))

    def mark_faulty(self, until=None):
        self.status = PathStatus.FAULTY
        self.faulty_until = until


@dataclass
class PathSet:
    paths: list[Path] = field(default_factory=list)
    requested: int = 3

    @property
    def primary(self):
        return self.paths[0] if self.paths else None

    @property
    def backup1(self):
        return self.paths[1] if len(self.paths) > 1 else None

    @property
    def backup2(self):
        return self.paths[2] if len(self.paths) > 2 else None

    @property
    def shortfall(self) -> int:
        return self.requested - len(self.paths)

    def nodes(self):
        out = set()
        for p in self.paths:
            out.update(p.hops)
        return out

    def validate(self):
        for i, a in enumerate(self.paths):
            for b in self.paths[i + 1:]:
                assert not set(a.interior) & set(b.interior), "path interiors overlap"
                assert a.hops != b.hops, "duplicate path"
                assert a.cost <= b.cost, "paths out of cost order"
        return True


def _check_endpoints(graph, src, dst):
    if src == dst:
        raise ValueError("src and dst must differ")
    if not (graph.is_present(src) and graph.is_present(dst)):
        raise NoRoute(f"{src}->{dst}: endpoint not present")


def shortest_path(graph, src, dst, size_bits=800, state=None, allow_direct=True):
    """Cheapest path by summed per-link transmit+receive energy."""
    _check_endpoints(graph, src, dst)
    if state is None:
        state = graph.state
    hops, cost = kernels.shortest_path(
        graph.indptr, graph.indices, graph.weights(size_bits), state, src, dst, allow_direct
    )
    if hops is None:
        raise NoRoute(f"{src}->{dst}: unreachable")
    return Path(hops, cost)


def build_path_set(graph, src, dst, k=3, size_bits=800):
    """Up to ``k`` internally node-disjoint paths, cheapest first.

    Greedy: take the shortest path, remove its interior nodes (or the direct
    link if it has none) and search again. This can miss a disjoint set that
    a flow-based method would find.
    """
    _check_endpoints(graph, src, dst)
    state = graph.state.copy()
    weights = graph.weights(size_bits)
    allow_direct = True
    ps = PathSet(requested=k)
    for _ in range(k):
        hops, cost = kernels.shortest_path(graph.indptr, graph.indices, weights, state, src, dst, allow_direct)
        if hops is None:
            break
        ps.paths.append(Path(hops, cost))
        if len(hops) == 2:
            allow_direct = False
        for v in hops[1:-1]:
            state[v] = kernels.EXCLUDED
    if not ps.paths:
        raise NoRoute(f"{src}->{dst}: unreachable")
    ps.validate()
    return ps


def select_path(ps: PathSet) -> Path:
    for p in ps.paths:
        if p.status is PathStatus.USABLE:
            return p
    raise AllPathsDown("no usable path")


def should_forward(received_reading: float, own_reading: float, epsilon: float = 0.0) -> bool:
    """A relay drops data that matches its own reading within ``epsilon``."""
    return abs(received_reading - own_reading) > epsilon
