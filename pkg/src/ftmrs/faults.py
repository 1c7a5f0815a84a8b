"""Fault injection, neighbourhood-based detection and role recovery."""
from __future__ import annotations

import enum
import math
import statistics
from dataclasses import dataclass, field

import numpy as np

from .core import FAULT_CLASSES, NodeRole

DEFAULT_MIX = {c: 1.0 / len(FAULT_CLASSES) for c in FAULT_CLASSES}


@dataclass(frozen=True)
class FaultCampaign:
    node_fault_fraction: float = 0.0
    fault_mix: dict = field(default_factory=lambda: dict(DEFAULT_MIX))
    transmission_fault_prob: float = 0.0
    onset: int = 0
    # faults trickle in evenly over this many rounds starting at onset
    spread_rounds: int = 1
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.node_fault_fraction <= 1.0:
            raise ValueError("node_fault_fraction must lie in [0, 1]")
        if not 0.0 <= self.transmission_fault_prob <= 1.0:
            raise ValueError("transmission_fault_prob must lie in [0, 1]")
        unknown = set(self.fault_mix) - set(FAULT_CLASSES)
        if unknown:
            raise ValueError(f"unknown fault classes {sorted(unknown)}")
        if any(w < 0 for w in self.fault_mix.values()):
            raise ValueError("fault_mix weights must be non-negative")
        if not math.isclose(sum(self.fault_mix.values()), 1.0, abs_tol=1e-9):
            raise ValueError("fault_mix must sum to 1")
        if self.onset < 0 or self.spread_rounds < 1:
            raise ValueError("onset must be >= 0 and spread_rounds >= 1")


@dataclass(frozen=True)
class InjectedFault:
    node: int
    circuit: str
    round: int


def fault_plan(campaign: FaultCampaign, node_ids, node_count=None):
    """Deterministic list of ``(due_round, node, circuit)``.

    ``floor(fraction * node_count)`` distinct nodes are drawn from
    ``node_ids`` (capped at its length) and released from ``onset`` on,
    evenly over ``spread_rounds`` rounds.
    """
    node_ids = sorted(node_ids)
    if node_count is None:
        node_count = len(node_ids)
    count = min(math.floor(campaign.node_fault_fraction * node_count), len(node_ids))
    if count == 0:
        return []
    rng = np.random.default_rng([campaign.seed, 0x5EED])
    chosen = rng.permutation(len(node_ids))[:count]
    classes = list(FAULT_CLASSES)
    probs = np.array([campaign.fault_mix.get(c, 0.0) for c in classes])
    picks = rng.choice(len(classes), size=count, p=probs / probs.sum())
    plan = []
    for j, (idx, c) in enumerate(zip(chosen, picks)):
        due = campaign.onset + (j * campaign.spread_rounds) // count
        plan.append((due, node_ids[int(idx)], classes[int(c)]))
    return plan


def inject(campaign, nodes, round_index, rng=None, plan=None, graph=None):
    """Apply the faults due this round and draw this round's link faults.

    Returns ``(injected, faulty_links)``: the ``InjectedFault`` records applied
    now and a set of edge ids of the present graph that corrupt traffic this
    round. Link draws come from a generator keyed on (seed, round), so they
    do not depend on what the network did earlier.
    """
    if plan is None:
        plan = fault_plan(campaign, [n.id for n in nodes if n.role is not NodeRole.STANDBY], len(nodes))
    injected = []
    for due, node_id, circuit in plan:
        if due != round_index:
            continue
        node = nodes[node_id]
        if node.is_dead:
            continue
        node.status = node.status.with_fault(circuit)
        injected.append(InjectedFault(node_id, circuit, round_index))
    faulty = set()
    p = campaign.transmission_fault_prob
    if p > 0 and graph is not None and len(graph.edges):
        if rng is None:
            rng = np.random.default_rng([campaign.seed, round_index, 0x7F])
        draws = rng.random(len(graph.edges))
        faulty = {int(e) for e in np.flatnonzero(draws < p)}
    return injected, faulty


class Verdict(enum.Enum):
    TRANSMISSION_FAULT = "transmission_fault"
    DEAD_NODE = "dead_node"
    RECEIVER_FAULT = "receiver_fault"
    SENSOR_FAULT = "sensor_fault"
    BATTERY_FAULT = "battery_fault"
    HEALTHY = "healthy"


# verdict that counts as a correct diagnosis for each injected circuit fault
EXPECTED_VERDICT = {
    "microcontroller_ok": Verdict.DEAD_NODE,
    "transmitter_ok": Verdict.DEAD_NODE,
    "battery_ok": Verdict.BATTERY_FAULT,
    "receiver_ok": Verdict.RECEIVER_FAULT,
    "sensor_circuit_ok": Verdict.SENSOR_FAULT,
}


@dataclass(frozen=True)
class Diagnosis:
    suspect: int
    verdict: Verdict
    round: int
    reporter: int


@dataclass(frozen=True)
class Thresholds:
    sensor_threshold: float = 3.0
    battery_threshold: float = 0.01
    ack_timeout: int = 1
    # readings (own included) needed before outliers are judged
    min_readings: int = 3


ACK_OK, ACK_CORRUPT, ACK_SILENT = "ok", "corrupt", "silent"


def detect(node, ack_table, neighbor_readings, own_battery, thresholds=Thresholds(),
           round_index=0, own_reading=None, silent_streak=None):
    """Run one node's checks for this round.

    ``ack_table`` maps each neighbour to ``"ok"``, ``"corrupt"`` (frame
    arrived damaged) or ``"silent"``. Silence from every neighbour means our
    own receiver is broken; silence from some means those partners are dead
    once it has lasted ``ack_timeout`` rounds (``silent_streak`` carries the
    count, default 1). Readings more than ``sensor_threshold`` from the local
    median flag that neighbour's sensor. A battery reading under
    ``battery_threshold`` is a battery fault.
    """
    me = node.id
    out = []
    if ack_table and node.role is not NodeRole.END:
        if all(a == ACK_SILENT for a in ack_table.values()):
            out.append(Diagnosis(me, Verdict.RECEIVER_FAULT, round_index, me))
        else:
            for v in sorted(ack_table):
                a = ack_table[v]
                if a == ACK_CORRUPT:
                    out.append(Diagnosis(v, Verdict.TRANSMISSION_FAULT, round_index, me))
                elif a == ACK_SILENT:
                    streak = 1 if silent_streak is None else silent_streak.get(v, 1)
                    if streak >= thresholds.ack_timeout:
                        out.append(Diagnosis(v, Verdict.DEAD_NODE, round_index, me))
            values = list(neighbor_readings.values())
            if own_reading is not None:
                values.append(own_reading)
            if len(values) >= thresholds.min_readings:
                med = statistics.median(values)
                for v in sorted(neighbor_readings):
                    if abs(neighbor_readings[v] - med) > thresholds.sensor_threshold:
                        out.append(Diagnosis(v, Verdict.SENSOR_FAULT, round_index, me))
    if own_battery < thresholds.battery_threshold:
        out.append(Diagnosis(me, Verdict.BATTERY_FAULT, round_index, me))
    if not out:
        out.append(Diagnosis(me, Verdict.HEALTHY, round_index, me))
    return out


@dataclass(frozen=True)
class RecoveryAction:
    kind: str
    node: int
    detail: object = None


def _nearest_standby(dead, graph):
    # spares within radio range of any of the dead node's neighbours
    nodes = graph.nodes
    reach = set()
    for w in graph.all_neighbors(dead):
        if w == graph.bs or nodes[w].is_dead:
            continue
        reach.update(graph.all_neighbors(w))
    reach.update(graph.all_neighbors(dead))
    spares = [s for s in reach if s != graph.bs and nodes[s].role is NodeRole.STANDBY]
    if not spares:
        return None
    pos = nodes[dead].pos
    return min(spares, key=lambda s: (nodes[s].pos.distance(pos), s))


def recover(diag, cluster, graph):
    """Apply the role change a diagnosis calls for.

    Sensor faults demote to a relay-only traffic node, receiver faults to an
    end node. Dead and battery verdicts remove the node and let its cluster
    head wake the nearest spare, which joins ``cluster``.
    """
    if diag.verdict is Verdict.HEALTHY:
        raise ValueError("nothing to recover from a healthy verdict")
    if diag.verdict is Verdict.TRANSMISSION_FAULT:
        return [RecoveryAction("path_retry", diag.suspect)]
    node = graph.nodes[diag.suspect]
    if node.is_dead:
        return []
    if diag.verdict is Verdict.SENSOR_FAULT:
        node.declare("sensor_circuit_ok")
        graph.refresh([node.id])
        return [RecoveryAction("reassign", node.id, node.role)]
    if diag.verdict is Verdict.RECEIVER_FAULT:
        node.declare("receiver_ok")
        graph.refresh([node.id])
        return [RecoveryAction("reassign", node.id, node.role)]
    node.declare("battery_ok" if diag.verdict is Verdict.BATTERY_FAULT else "transmitter_ok")
    node.is_cluster_head = False
    actions = [RecoveryAction("declare_dead", node.id, diag.verdict)]
    if cluster is not None and node.id in cluster.members:
        cluster.members.remove(node.id)
    spare = _nearest_standby(node.id, graph)
    if spare is None:
        actions.append(RecoveryAction("no_standby", node.id))
    else:
        s = graph.nodes[spare]
        s.role = NodeRole.NORMAL
        if cluster is not None:
            if spare in cluster.standbys:
                cluster.standbys.remove(spare)
            cluster.members.append(spare)
            cluster.members.sort()
            s.cluster = cluster.head
        actions.append(RecoveryAction("activate_standby", spare, node.id))
    graph.refresh([node.id] if spare is None else [node.id, spare])
    return actions


def diagnosis_rate(injected, detected, window):
    """Share of injected node faults correctly identified within ``window`` rounds."""
    if window < 1:
        raise ValueError("window must be at least 1")
    injected = list(injected)
    if not injected:
        return 1.0
    seen = {}
    for d in detected:
        seen.setdefault((d.suspect, d.verdict), []).append(d.round)
    hits = 0
    for f in injected:
        rounds = seen.get((f.node, EXPECTED_VERDICT[f.circuit]), ())
        if any(0 <= r - f.round < window for r in rounds):
            hits += 1
    return hits / len(injected)
