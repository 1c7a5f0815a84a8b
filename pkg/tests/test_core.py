import pytest

from ftmrs.core import (
    FAULT_CLASSES,
    HardwareStatus,
    NodeRole,
    NodeState,
    Packet,
    Position,
    all_statuses,
    classify_role,
)


@pytest.mark.parametrize("status, role", [
    (HardwareStatus(), NodeRole.NORMAL),
    (HardwareStatus(sensor_circuit_ok=False), NodeRole.TRAFFIC),
    (HardwareStatus(receiver_ok=False), NodeRole.END),
    (HardwareStatus(battery_ok=False), NodeRole.DEAD),
    (HardwareStatus(transmitter_ok=False), NodeRole.DEAD),
    (HardwareStatus(microcontroller_ok=False), NodeRole.DEAD),
    (HardwareStatus(sensor_circuit_ok=False, receiver_ok=False), NodeRole.END),
    (HardwareStatus(receiver_ok=False, battery_ok=False), NodeRole.DEAD),
])
def test_role_examples(status, role):
    assert classify_role(status) is role


def test_all_statuses_is_complete():
    statuses = list(all_statuses())
    assert len(statuses) == 32
    assert len(set(statuses)) == 32


def test_with_fault_rejects_unknown_circuit():
    with pytest.raises(ValueError):
        HardwareStatus().with_fault("antenna_ok")


def test_capabilities():
    s = HardwareStatus(receiver_ok=False)
    assert s.can_transmit and not s.can_receive
    s = HardwareStatus(microcontroller_ok=False)
    assert not s.can_transmit and not s.can_receive


def test_dead_is_absorbing():
    n = NodeState(0, Position(0, 0), 0.5)
    n.kill()
    assert n.is_dead
    for circuit in FAULT_CLASSES:
        n.declare(circuit)
        assert n.role is NodeRole.DEAD


def test_declare_follows_dominance():
    n = NodeState(0, Position(0, 0), 0.5)
    n.declare("sensor_circuit_ok")
    assert n.role is NodeRole.TRAFFIC
    n.declare("receiver_ok")
    assert n.role is NodeRole.END
    n.declare("transmitter_ok")
    assert n.role is NodeRole.DEAD


def test_standby_keeps_role_when_declared():
    n = NodeState(0, Position(0, 0), 0.5, role=NodeRole.STANDBY)
    n.declare("sensor_circuit_ok")
    assert n.role is NodeRole.STANDBY


def test_negative_energy_rejected():
    with pytest.raises(ValueError):
        NodeState(0, Position(0, 0), -0.1)


def test_position_distance_and_bounds():
    assert Position(0, 0).distance(Position(3, 4)) == 5.0
    assert Position(300, 0).within(300, 300)
    assert not Position(300.1, 0).within(300, 300)


def test_packet_checks():
    with pytest.raises(ValueError):
        Packet(0, 1, 2, 0.0, 0, 0)
    with pytest.raises(ValueError):
        Packet(0, 1, 2, 0.0, 800, 0, hop_trace=[2])
    p = Packet(0, 1, 2, 0.0, 800, 5)
    with pytest.raises(ValueError):
        p.mark_delivered(4)
    p.mark_delivered(5)
    assert p.delivered_round == 5
    c = p.copy(duplicate=True)
    assert c.is_duplicate and c.hop_trace == [1] and c.key == p.key
