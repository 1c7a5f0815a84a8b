"""Domain types shared across the simulator."""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field


class NodeRole(enum.Enum):
    NORMAL = "normal"
    TRAFFIC = "traffic"
    END = "end"
    DEAD = "dead"
    STANDBY = "standby"


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def distance(self, other: "Position") -> float:
        dx = self.x - other.x
        dy = self.y - other.y
        return math.sqrt(dx * dx + dy * dy)

    def within(self, width: float, height: float) -> bool:
        return 0.0 <= self.x <= width and 0.0 <= self.y <= height


@dataclass(frozen=True)
class HardwareStatus:
    microcontroller_ok: bool = True
    sensor_circuit_ok: bool = True
    transmitter_ok: bool = True
    receiver_ok: bool = True
    battery_ok: bool = True

    @property
    def can_transmit(self) -> bool:
        return self.microcontroller_ok and self.transmitter_ok

    @property
    def can_receive(self) -> bool:
        return self.microcontroller_ok and self.receiver_ok

    def with_fault(self, circuit: str) -> "HardwareStatus":
        """Copy with one circuit flag cleared; ``circuit`` is a field name."""
        if circuit not in FAULT_CLASSES:
            raise ValueError(f"unknown circuit {circuit!r}")
        values = {name: getattr(self, name) for name in FAULT_CLASSES}
        values[circuit] = False
        return HardwareStatus(**values)


FAULT_CLASSES = (
    "microcontroller_ok",
    "sensor_circuit_ok",
    "transmitter_ok",
    "receiver_ok",
    "battery_ok",
)


def classify_role(status: HardwareStatus) -> NodeRole:
    """Map a hardware status to its node category.

    Transmitter, microcontroller or battery faults make a node dead no matter
    what else is broken. A broken receiver stops relaying, so it outranks a
    broken sensor, which still lets the node relay.
    """
    if not (status.microcontroller_ok and status.transmitter_ok and status.battery_ok):
        return NodeRole.DEAD
    if not status.receiver_ok:
        return NodeRole.END
    if not status.sensor_circuit_ok:
        return NodeRole.TRAFFIC
    return NodeRole.NORMAL


def all_statuses():
    for flags in itertools.product((True, False), repeat=len(FAULT_CLASSES)):
        yield HardwareStatus(*flags)


@dataclass
class NodeState:
    id: int
    pos: Position
    energy: float
    status: HardwareStatus = field(default_factory=HardwareStatus)
    role: NodeRole = NodeRole.NORMAL
    cluster: int | None = None
    is_cluster_head: bool = False
    sensed_value: float = 0.0
    # faults the network has diagnosed so far; role follows from these
    known_status: HardwareStatus = field(default_factory=HardwareStatus)

    def __post_init__(self):
        if self.energy < 0:
            raise ValueError("energy must be non-negative")

    @property
    def is_dead(self) -> bool:
        return self.role is NodeRole.DEAD

    @property
    def is_active(self) -> bool:
        """Deployed, not a spare, and not declared dead."""
        return self.role not in (NodeRole.DEAD, NodeRole.STANDBY)

    @property
    def hardware_alive(self) -> bool:
        # what the node can physically do, regardless of what has been diagnosed
        return self.is_active and self.energy > 0 and self.status.microcontroller_ok

    def declare(self, circuit: str) -> None:
        """Record a diagnosed fault and update the role. Dead never reverts."""
        if self.role is NodeRole.DEAD:
            return
        self.known_status = self.known_status.with_fault(circuit)
        if self.role is not NodeRole.STANDBY:
            self.role = classify_role(self.known_status)

    def kill(self) -> None:
        self.status = self.status.with_fault("battery_ok")
        self.known_status = self.known_status.with_fault("battery_ok")
        self.role = NodeRole.DEAD
        self.is_cluster_head = False
        self.cluster = None


@dataclass
class Packet:
    seq: int
    src: int
    dst: int
    payload: float
    size_bits: int
    created_round: int
    delivered_round: int | None = None
    hop_trace: list[int] = field(default_factory=list)
    is_duplicate: bool = False
    # (src, seq) keys of member packets folded into an aggregate
    contents: tuple = ()
    attempts: int = 0

    def __post_init__(self):
        if self.size_bits <= 0:
            raise ValueError("size_bits must be positive")
        if not self.hop_trace:
            self.hop_trace = [self.src]
        elif self.hop_trace[0] != self.src:
            raise ValueError("hop_trace must begin with src")

    @property
    def key(self) -> tuple[int, int]:
        return (self.src, self.seq)

    def mark_delivered(self, round_index: int) -> None:
        if round_index < self.created_round:
            raise ValueError("delivery precedes creation")
        self.delivered_round = round_index

    def copy(self, duplicate: bool = False) -> "Packet":
        return Packet(
            seq=self.seq,
            src=self.src,
            dst=self.dst,
            payload=self.payload,
            size_bits=self.size_bits,
            created_round=self.created_round,
            hop_trace=[self.src],
            is_duplicate=duplicate,
            contents=self.contents,
            attempts=self.attempts,
        )


@dataclass(frozen=True)
class EnergyParams:
    alpha1: float = 50e-9
    alpha2: float = 10e-12
    alpha3: float = 50e-9
    path_loss_n: float = 2.0

    def __post_init__(self):
        if min(self.alpha1, self.alpha2, self.alpha3) <= 0:
            raise ValueError("energy coefficients must be strictly positive")
        if not 2.0 <= self.path_loss_n <= 4.0:
            raise ValueError("path_loss_n must lie in [2, 4]")
