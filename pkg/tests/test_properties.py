"""Property tests for invariants that should hold on any input."""
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import best_path, bfs_hops, csr_to_adj, radio_cost
from ftmrs.core import FAULT_CLASSES, HardwareStatus, NodeRole, NodeState, Packet, Position, classify_role
from ftmrs.energy import EnergyLedger, multipath_energy, receive_energy, transmit_energy
from ftmrs.routing import NoRoute, PathStatus, build_path_set, shortest_path
from ftmrs.topology import build_graph, deploy
from ftmrs.traffic import TxQueue, enqueue, schedule

coords = st.tuples(st.floats(0, 100), st.floats(0, 100))


def graph_from(points, radio_range, roles=()):
    nodes = [NodeState(i, Position(*p), 0.5) for i, p in enumerate(points)]
    for i, role in roles:
        nodes[i].role = role
    return build_graph(nodes, radio_range)


@given(d=st.floats(0, 500), bits=st.integers(1, 10_000))
def test_energy_matches_radio_formula(d, bits):
    got = transmit_energy(d, bits) + receive_energy(bits)
    assert got == pytest.approx(radio_cost(d, bits), rel=1e-12)


@given(d1=st.floats(0, 500), d2=st.floats(0, 500), bits=st.integers(1, 10_000))
def test_transmit_monotone_in_range(d1, d2, bits):
    lo, hi = sorted((d1, d2))
    assert transmit_energy(lo, bits) <= transmit_energy(hi, bits)


@given(d=st.floats(0, 500), a=st.integers(1, 5000), b=st.integers(1, 5000))
def test_energy_linear_in_bits(d, a, b):
    assert transmit_energy(d, a + b) == pytest.approx(transmit_energy(d, a) + transmit_energy(d, b))
    assert receive_energy(a + b) == pytest.approx(receive_energy(a) + receive_energy(b))


@given(k=st.integers(1, 6), e=st.floats(0, 1))
def test_multipath_scales(k, e):
    assert multipath_energy(k, e) == pytest.approx(k * e)


@given(flags=st.tuples(*[st.booleans()] * len(FAULT_CLASSES)))
def test_role_dominance(flags):
    status = HardwareStatus(*flags)
    role = classify_role(status)
    if not (status.microcontroller_ok and status.battery_ok and status.transmitter_ok):
        assert role is NodeRole.DEAD
    elif not status.receiver_ok:
        assert role is NodeRole.END
    elif not status.sensor_circuit_ok:
        assert role is NodeRole.TRAFFIC
    else:
        assert role is NodeRole.NORMAL


@given(charges=st.lists(st.tuples(st.integers(0, 9), st.floats(0, 0.2),
                                  st.sampled_from(["tx", "rx", "other"])), max_size=60),
       deaths=st.lists(st.integers(0, 9), max_size=4))
def test_ledger_conserves_energy(charges, deaths):
    nodes = [NodeState(i, Position(0, 0), 0.5) for i in range(10)]
    ledger = EnergyLedger(5.0)
    for i, amount, kind in charges:
        ledger.charge(nodes[i], amount, kind)
        assert nodes[i].energy >= 0
    for i in deaths:
        ledger.write_off(nodes[i])
        assert nodes[i].energy == 0
    assert ledger.residual_gap(nodes) < 1e-12


@given(n=st.integers(1, 300), seed=st.integers(0, 10_000), w=st.floats(1, 1000), h=st.floats(1, 1000),
       extra=st.integers(1, 50))
def test_deploy_bounds_and_nesting(n, seed, w, h, extra):
    small = deploy(n, (w, h), seed=seed)
    big = deploy(n + extra, (w, h), seed=seed)
    assert all(nd.pos.within(w, h) for nd in big)
    assert [nd.pos for nd in small] == [nd.pos for nd in big[:n]]


@given(points=st.lists(coords, min_size=2, max_size=30), r=st.floats(1, 60))
def test_graph_symmetric_and_within_range(points, r):
    g = graph_from(points, r)
    adj = csr_to_adj(g.indptr, g.indices, g.weights(800))
    for u, nbrs in adj.items():
        for v, w in nbrs.items():
            assert u != v
            assert adj[v][u] == w
            assert g.distance(u, v) <= r or g.bs in (u, v)


@given(points=st.lists(coords, min_size=3, max_size=9), r=st.floats(10, 80), data=st.data())
def test_shortest_path_matches_oracle(points, r, data):
    g = graph_from(points, r)
    n = len(points)
    src, dst = data.draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
    state = np.array(g.state, copy=True)
    for v in range(n):
        if v not in (src, dst):
            state[v] = data.draw(st.sampled_from([0, 0, 1, 2]))
    allow_direct = data.draw(st.booleans())
    adj = csr_to_adj(g.indptr, g.indices, g.weights(800))
    want, want_cost = best_path(adj, src, dst, state, allow_direct)
    try:
        got = shortest_path(g, src, dst, state=state, allow_direct=allow_direct)
    except NoRoute:
        assert want is None
        return
    assert got.hops == want
    assert got.cost == want_cost


@given(points=st.lists(coords, min_size=3, max_size=40), r=st.floats(15, 60), data=st.data(),
       k=st.integers(1, 4))
def test_path_set_invariants(points, r, data, k):
    g = graph_from(points, r)
    n = len(points)
    src, dst = data.draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
    try:
        ps = build_path_set(g, src, dst, k=k)
    except NoRoute:
        assert bfs_hops(csr_to_adj(g.indptr, g.indices, g.weights(800)), src, g.state)[dst] == -1
        return
    assert 1 <= len(ps.paths) <= k
    assert ps.shortfall == k - len(ps.paths)
    seen = set()
    for p in ps.paths:
        assert p.src == src and p.dst == dst
        assert not seen & set(p.interior)
        seen.update(p.interior)
        for a, b in p.links():
            assert g.edge_id(a, b) is not None
    costs = [p.cost for p in ps.paths]
    assert costs == sorted(costs)
    assert sum(len(p.hops) == 2 for p in ps.paths) <= 1
    assert ps.primary.cost == shortest_path(g, src, dst).cost


@given(points=st.lists(coords, min_size=2, max_size=30), r=st.floats(5, 60), data=st.data())
def test_hop_counts_match_bfs(points, r, data):
    g = graph_from(points, r)
    src = data.draw(st.integers(0, len(points) - 1))
    adj = csr_to_adj(g.indptr, g.indices, g.weights(800))
    assert list(g.hops_from(src)) == bfs_hops(adj, src, g.state)


@given(count=st.integers(0, 30), n_paths=st.integers(0, 3), copies=st.integers(1, 3))
def test_schedule_is_fifo(count, n_paths, copies):
    from ftmrs.routing import Path, PathSet

    ps = PathSet([Path([0, i + 1, 9], float(i)) for i in range(n_paths)], requested=3)
    q = TxQueue()
    pkts = [Packet(i, 0, 9, 0.0, 800, 0) for i in range(count)]
    for p in pkts:
        assert enqueue(q, p, 0)
    sent = schedule(q, ps, 0, copies=copies)
    # each path carries at most one packet per round, and packets leave in order
    slots = [slot for _, _, slot, _, _ in sent]
    assert len(slots) == len(set(slots))
    order = []
    for pkt, *_ in sent:
        if not order or order[-1] is not pkt:
            order.append(pkt)
    assert order == pkts[:len(order)]
    assert q.packets() == pkts[len(order):]
    assert all(p.status is PathStatus.BUSY for _, p, *_ in sent)
