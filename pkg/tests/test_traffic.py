import pytest

from ftmrs.core import NodeState, Packet, Position
from ftmrs.routing import Path, PathSet, PathStatus
from ftmrs.traffic import TxQueue, enqueue, schedule


def pkt(seq, attempts=0):
    p = Packet(seq, 0, 9, 1.0, 800, 0)
    p.attempts = attempts
    return p


def three_paths():
    return PathSet([Path([0, 1, 9], 1.0), Path([0, 2, 9], 2.0), Path([0, 3, 9], 3.0)])


def test_fifo_order():
    q = TxQueue()
    for i in range(3):
        assert enqueue(q, pkt(i), 0)
    assert [p.seq for p in q.packets()] == [0, 1, 2]


def test_capacity_drop():
    q = TxQueue(capacity=2)
    results = [enqueue(q, pkt(i), 0) for i in range(3)]
    assert results == [True, True, False]
    assert q.losses == 1 and len(q) == 2


def test_dead_node_cannot_enqueue():
    n = NodeState(0, Position(0, 0), 0.5)
    n.kill()
    q = TxQueue()
    assert not enqueue(q, pkt(0), 0, n)
    assert q.losses == 1


def test_empty_queue():
    assert schedule(TxQueue(), three_paths(), 0) == []


def test_second_packet_takes_backup():
    q = TxQueue()
    enqueue(q, pkt(0), 0)
    enqueue(q, pkt(1), 0)
    ps = three_paths()
    out = schedule(q, ps, 0)
    assert [(p.seq, slot) for p, _, slot, _, _ in out] == [(0, 0), (1, 1)]
    assert ps.primary.status is PathStatus.BUSY and ps.backup1.status is PathStatus.BUSY
    assert ps.backup2.status is PathStatus.USABLE


def test_slot_gap_pushes_to_backup():
    q = TxQueue()
    ps = three_paths()
    enqueue(q, pkt(0), 0)
    schedule(q, ps, 0, slot_gap=2)
    for p in ps.paths:
        p.status = PathStatus.USABLE
    enqueue(q, pkt(1), 1)
    out = schedule(q, ps, 1, slot_gap=2)
    assert [slot for _, _, slot, _, _ in out] == [1]


def test_backpressure_when_nothing_free():
    q = TxQueue()
    ps = three_paths()
    for p in ps.paths:
        p.status = PathStatus.FAULTY
    enqueue(q, pkt(0), 0)
    assert schedule(q, ps, 0) == []
    assert q.backpressure == 1 and len(q) == 1
    assert schedule(q, None, 0) == [] and q.backpressure == 2


def test_duplicate_copies_and_retries():
    q = TxQueue()
    enqueue(q, pkt(0), 0)
    out = schedule(q, three_paths(), 0, copies=3)
    assert [slot for _, _, slot, _, _ in out] == [0, 1, 2]
    q = TxQueue()
    enqueue(q, pkt(0, attempts=1), 0)
    enqueue(q, pkt(1), 0)
    out = schedule(q, three_paths(), 0, copies=1, retry_copies=2)
    assert [(p.seq, slot) for p, _, slot, _, _ in out] == [(0, 0), (0, 1), (1, 2)]


def test_requeue_keeps_fcfs_position():
    q = TxQueue()
    for i in range(3):
        enqueue(q, pkt(i), 0)
    order, arrival, first = q.entries.pop(0)
    q.requeue(first, order, arrival)
    assert [p.seq for p in q.packets()] == [0, 1, 2]


def test_slot_gap_validated():
    with pytest.raises(ValueError):
        schedule(TxQueue(), three_paths(), 0, slot_gap=0)
