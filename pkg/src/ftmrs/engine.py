"""Round-synchronous simulation of clustered multipath routing.

Every round runs the same phases in the same order:

1. inject faults (node circuits and per-link corruption);
2. members sense and queue one packet each;
3. members send to their cluster head (hop acks, failover on failure);
4. heads aggregate what arrived and send it towards the base station;
5. every node runs its neighbourhood checks;
6. diagnoses are acted on (role changes, dead-node removal, spares);
7. the round is reported.

Clusters are rebuilt every ``recluster_period`` rounds and whenever a head
dies. A run ends at ``rounds_max`` or once the network is exhausted (see
``Simulation._check_exhausted``); the round count at that point is the
network lifetime.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import EnergyParams, NodeRole, Packet, Position
from .energy import EnergyLedger, receive_energy, transmit_energy
from .faults import (
    ACK_CORRUPT,
    ACK_OK,
    ACK_SILENT,
    FaultCampaign,
    Thresholds,
    Verdict,
    detect,
    fault_plan,
    inject,
    recover,
)
from .routing import NoRoute, PathStatus, build_path_set, should_forward
from .topology import build_graph, default_load_budget, deploy, elect_heads, form_clusters
from .traffic import TxQueue, enqueue, schedule

log = logging.getLogger(__name__)

# the network counts as cut off once the sink can reach no more than this
# share of the energy still held by working nodes
SINK_CUTOFF_SHARE = 0.5

FAILOVER = "ftmrs"
DUPLICATE = "always_duplicate"


@dataclass(frozen=True)
class ScenarioConfig:
    node_count: int = 100
    area_width: float = 300.0
    area_height: float = 300.0
    radio_range: float = 60.0
    bs_range: float = 0.0  # 0: same as radio_range
    standby_fraction: float = 0.0
    rounds_max: int = 1000
    initial_energy: float = 0.5
    energy: EnergyParams = field(default_factory=EnergyParams)
    packet_bits: int = 800
    # "fixed": one packet_bits aggregate per head; "sum": member bits add up
    aggregate_mode: str = "fixed"
    faults: FaultCampaign = field(default_factory=FaultCampaign)
    slot_gap: int = 1
    recluster_period: int = 100
    redundancy_mode: str = FAILOVER
    path_count: int = 3
    cluster_count: int = 0  # 0: derive from the load budget
    load_budget: int = 0  # 0: derive from head energy
    separation_radius: float = 0.0  # 0: half the spacing of a square grid of heads
    bs_x: float | None = None
    bs_y: float | None = None
    epsilon: float = 0.0
    sensor_threshold: float = 3.0
    battery_fraction: float = 0.02
    ack_timeout: int = 1
    field_base: float = 25.0
    field_gradient: float = 0.01
    noise_sigma: float = 0.05
    idle_drain: float = 0.0
    probe_bits: int = 0
    # size of the broadcast that tells neighbours about a diagnosis; 0: packet_bits
    notify_bits: int = 0
    queue_capacity: int = 0  # 0: unbounded
    forced_primary_failure: float = 0.0
    keep_traces: bool = False
    seed: int = 1

    def validate(self):
        positive = {
            "node_count": self.node_count,
            "area_width": self.area_width,
            "area_height": self.area_height,
            "radio_range": self.radio_range,
            "initial_energy": self.initial_energy,
            "packet_bits": self.packet_bits,
            "slot_gap": self.slot_gap,
            "recluster_period": self.recluster_period,
            "path_count": self.path_count,
            "ack_timeout": self.ack_timeout,
        }
        for name, value in positive.items():
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value!r}")
        if self.rounds_max < 0:
            raise ValueError("rounds_max must be non-negative")
        if self.redundancy_mode not in (FAILOVER, DUPLICATE):
            raise ValueError(f"redundancy_mode must be {FAILOVER!r} or {DUPLICATE!r}")
        if self.aggregate_mode not in ("fixed", "sum"):
            raise ValueError("aggregate_mode must be 'fixed' or 'sum'")
        if self.path_count > 3:
            raise ValueError("path_count must be 1, 2 or 3")
        if not 0.0 <= self.standby_fraction < 1.0:
            raise ValueError("standby_fraction must lie in [0, 1)")
        if not 0.0 <= self.forced_primary_failure <= 1.0:
            raise ValueError("forced_primary_failure must lie in [0, 1]")
        for name in ("bs_range", "cluster_count", "load_budget", "separation_radius", "epsilon",
                     "noise_sigma", "idle_drain", "probe_bits", "notify_bits", "queue_capacity", "battery_fraction"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        return self

    @property
    def bs_pos(self):
        x = self.area_width / 2 if self.bs_x is None else self.bs_x
        y = self.area_height if self.bs_y is None else self.bs_y
        return Position(x, y)

    @property
    def copies(self):
        return self.path_count if self.redundancy_mode == DUPLICATE else 1


@dataclass
class RoundReport:
    round: int
    global_energy: float
    packets_created: int = 0
    packets_delivered: int = 0
    packets_dropped: int = 0
    mean_delay: float | None = None
    diagnoses: int = 0
    deaths: int = 0
    activations: int = 0
    alive_count: int = 0
    charged: float = 0.0
    energy_gap: float = 0.0
    transmissions: int = 0


@dataclass
class PacketRecord:
    created_round: int
    delivered_round: int | None = None
    suppressed: bool = False


@dataclass
class RunResult:
    config: ScenarioConfig
    reports: list
    packets: dict
    injected: list
    diagnoses: list
    events: list
    lifetime: int | None
    initial_energy: float
    node_count: int
    traces: list = field(default_factory=list)
    death_round: dict = field(default_factory=dict)
    final_energy: float = 0.0
    # relative conservation mismatch after the last round
    final_gap: float = 0.0

    @property
    def total_charged(self):
        return self.reports[-1].charged if self.reports else 0.0


class Simulation:
    def __init__(self, config: ScenarioConfig):
        self.config = config.validate()
        c = config
        self.nodes = deploy(c.node_count, (c.area_width, c.area_height), c.standby_fraction,
                            c.seed, c.initial_energy)
        self.graph = build_graph(self.nodes, c.radio_range, c.bs_pos, c.energy, c.bs_range or None)
        self.bs = self.graph.bs
        self.ledger = EnergyLedger(math.fsum(n.energy for n in self.nodes))
        self.campaign = replace(c.faults, seed=c.faults.seed or c.seed)
        self.plan = fault_plan(
            self.campaign, [n.id for n in self.nodes if n.role is not NodeRole.STANDBY], c.node_count
        )
        self.thresholds = Thresholds(
            sensor_threshold=c.sensor_threshold,
            battery_threshold=c.battery_fraction * c.initial_energy,
            ack_timeout=c.ack_timeout,
        )
        rng = np.random.default_rng([c.seed, 0xF1E1D])
        # stuck-at offsets a broken sensor reports
        self.sensor_offsets = rng.uniform(10.0, 20.0, c.node_count) * rng.choice([-1.0, 1.0], c.node_count)
        prio = np.random.default_rng([c.seed, 0xF0CE]).random(c.node_count)
        self.forced = {i for i in range(c.node_count) if prio[i] < c.forced_primary_failure}
        capacity = c.queue_capacity or None
        self.queues = {n.id: TxQueue(capacity) for n in self.nodes}
        self.agg_queues = {n.id: TxQueue(capacity) for n in self.nodes}
        self.pathsets = {}
        self.path_index = {}
        self.clustering = None
        self.head_of = {}
        self.need_recluster = True
        self.round = 0
        self.seq = [0] * c.node_count
        self.packets = {}
        self.aggregated = set()
        self.injected = []
        self.diagnoses = []
        self.events = []
        self.reports = []
        self.traces = []
        self.death_round = {}
        self.silent_streak = {}
        self.readings = {}
        self.lifetime = None
        self.exhausted = False
        self._topology_dirty = True
        self._round_deaths = 0
        self._dropped = 0
        self._tx_count = 0
        self._own_packets = {}
        self._faulty_links = set()
        self._idle_rounds = 0
        self._hops = None
        self._sources_left = True

    # -- helpers ----------------------------------------------------------

    def global_energy(self):
        return math.fsum(n.energy for n in self.nodes)

    def _can_send(self, node):
        return (node.role is not NodeRole.DEAD and node.role is not NodeRole.STANDBY
                and node.energy > 0 and node.status.can_transmit)

    def _can_hear(self, node):
        return (node.role is not NodeRole.DEAD and node.role is not NodeRole.STANDBY
                and node.energy > 0 and node.status.can_receive)

    def _senses(self, node):
        return (node.is_active and node.energy > 0 and node.status.microcontroller_ok
                and node.role is not NodeRole.TRAFFIC)

    def _on_death(self, node, cause):
        if node.id in self.death_round:
            return
        if not node.is_dead:
            node.kill()
        # a dead node's leftover charge is no longer network energy
        self.ledger.write_off(node)
        self.death_round[node.id] = self.round
        self._round_deaths += 1
        self.graph.refresh([node.id])
        self._invalidate(node.id)
        if self.head_of.get(node.id) == node.id:
            self.need_recluster = True
        self._detach(node.id)
        lost = len(self.queues[node.id]) + len(self.agg_queues[node.id])
        self.queues[node.id].entries.clear()
        self.agg_queues[node.id].entries.clear()
        self._dropped += lost
        self.events.append((self.round, node.id, "", "", cause))

    def _detach(self, node_id):
        head = self.head_of.pop(node_id, None)
        if head is not None and self.clustering is not None:
            cl = self.clustering.by_head(head)
            if cl is not None and node_id in cl.members:
                cl.members.remove(node_id)
        n = self.nodes[node_id]
        n.cluster = None
        n.is_cluster_head = False

    def _invalidate(self, node_id):
        for key in self.path_index.pop(node_id, ()):
            ps = self.pathsets.pop(key, None)
            if ps is None:
                continue
            for v in ps.nodes():
                if v != node_id:
                    self.path_index.get(v, set()).discard(key)
        self._topology_dirty = True

    def _pathset(self, src, dst):
        key = (src, dst)
        if key in self.pathsets:
            return self.pathsets[key]
        try:
            ps = build_path_set(self.graph, src, dst, self.config.path_count, self.config.packet_bits)
        except NoRoute:
            ps = None
        if ps is not None:
            if src in self.forced:
                ps.primary.mark_faulty(None)
                ps.primary.forced = True
            self.pathsets[key] = ps
            for v in ps.nodes():
                self.path_index.setdefault(v, set()).add(key)
        else:
            self.pathsets[key] = None
            self.path_index.setdefault(src, set()).add(key)
            self.path_index.setdefault(dst, set()).add(key)
        return ps

    def _charge(self, node, amount, kind):
        ok = self.ledger.charge(node, amount, kind)
        if node.energy <= 0:
            self._on_death(node, "drained")
            return False
        return ok

    # -- clustering -------------------------------------------------------

    def _recluster(self):
        c = self.config
        g = self.graph
        for n in self.nodes:
            n.is_cluster_head = False
            n.cluster = None
        self.head_of = {}
        self.clustering = None
        self.pathsets.clear()
        self.path_index.clear()
        bs_hops = g.hops_from(self.bs)
        candidates = [
            n.id for n in self.nodes
            if n.role in (NodeRole.NORMAL, NodeRole.TRAFFIC) and n.energy > 0 and bs_hops[n.id] > 0
        ]
        members = [n.id for n in self.nodes if n.is_active and n.energy > 0]
        if not candidates:
            return
        if c.load_budget > 0:
            budget = c.load_budget
        else:
            mean_e = math.fsum(self.nodes[i].energy for i in candidates) / len(candidates)
            budget = default_load_budget(mean_e, c.recluster_period, g.avg_link_range(),
                                         c.packet_bits, c.energy)
            budget = max(2, budget)
        if c.cluster_count > 0:
            k = c.cluster_count
        else:
            k = math.ceil(len(members) / budget)
        k = max(1, min(k, len(candidates)))
        heads = elect_heads(g, k, c.separation_radius or None, candidates)
        head_set = set(heads)
        clustering = form_clusters(g, heads, budget, [m for m in members if m not in head_set])
        self.clustering = clustering
        self.head_of = dict(clustering.head_of)
        for cl in clustering:
            self.nodes[cl.head].is_cluster_head = True
            self.nodes[cl.head].cluster = cl.head
            for m in cl.members:
                self.nodes[m].cluster = cl.head
        self.need_recluster = False
        self.events.append((self.round, -1, "", "", f"recluster:{len(heads)}"))

    # -- data plane -------------------------------------------------------

    def _transmit(self, packet, path, own_readings):
        """Walk ``path`` hop by hop. Returns ``(outcome, last_node)`` where
        outcome is "ok", "suppressed" or "lost"."""
        c = self.config
        bits = packet.size_bits
        hops = path.hops
        for i in range(len(hops) - 1):
            x, y = hops[i], hops[i + 1]
            nx = self.nodes[x]
            if not self._can_send(nx):
                return "lost", x
            d = self.graph.distance(x, y)
            if not self._charge(nx, transmit_energy(d, bits, c.energy), "tx"):
                return "lost", x
            self._tx_count += 1
            if y == self.bs:
                packet.hop_trace.append(y)
                return "ok", y
            ny = self.nodes[y]
            if not self._can_hear(ny):
                return "lost", x
            if not self._charge(ny, receive_energy(bits, c.energy), "rx"):
                return "lost", x
            if self._faulty_links and self.graph.edge_id(x, y) in self._faulty_links:
                return "lost", x
            packet.hop_trace.append(y)
            if y != path.dst and not packet.contents:
                own = own_readings.get(y)
                if own is not None and not should_forward(packet.payload, own, c.epsilon):
                    return "suppressed", y
        return "ok", hops[-1]

    def _source_learns(self, src_node):
        # End nodes send without waiting for acks; everyone else needs a
        # working receiver to hear them
        if src_node.role is NodeRole.END:
            return True, True
        return False, self._can_hear(src_node)

    def _drain_queue(self, node_id, q, dst, own_readings, on_arrival):
        r = self.round
        ps = self._pathset(node_id, dst)
        if ps is None:
            q.backpressure += 1
            return
        # a packet that failed before is duplicated over the remaining paths
        sends = schedule(q, ps, r, self.config.slot_gap, self.config.copies, self.config.path_count)
        by_packet = {}
        for packet, path, slot, order, arrival in sends:
            by_packet.setdefault(id(packet), (packet, order, arrival, []))[3].append((path, slot))
        src_node = self.nodes[node_id]
        for packet, order, arrival, routes in by_packet.values():
            packet.dst = dst
            packet.attempts += 1
            delivered = False
            failed_paths = []
            for path, slot in routes:
                tx = packet.copy(duplicate=slot > 0)
                outcome, where = self._transmit(tx, path, own_readings)
                if self.config.keep_traces:
                    self.traces.append((r, tx.key, tuple(tx.hop_trace), outcome))
                if outcome == "ok":
                    delivered = True
                    on_arrival(tx)
                elif outcome == "suppressed":
                    delivered = True
                    rec = self.packets.get(packet.key)
                    if rec is not None:
                        rec.suppressed = True
                else:
                    failed_paths.append(path)
            blind, hears = self._source_learns(src_node)
            if blind:
                continue
            if not hears:
                # no ack can arrive; the source assumes every copy was lost
                failed_paths = [p for p, _ in routes]
                delivered = False
            for path in failed_paths:
                if not path.forced:
                    path.mark_faulty(r + 1)
            if not delivered and self._can_send(src_node):
                q.requeue(packet, order, arrival)

    def _sense(self):
        c = self.config
        r = self.round
        rng = np.random.default_rng([c.seed, r, 0x5E45])
        noise = rng.normal(0.0, c.noise_sigma, c.node_count) if c.noise_sigma > 0 else np.zeros(c.node_count)
        readings = {}
        for n in self.nodes:
            if not self._senses(n):
                continue
            value = c.field_base + c.field_gradient * (n.pos.x + n.pos.y) + float(noise[n.id])
            if not n.status.sensor_circuit_ok:
                value += float(self.sensor_offsets[n.id])
            n.sensed_value = value
            readings[n.id] = value
        self.readings = readings
        created = 0
        own = {}
        for n in self.nodes:
            head = self.head_of.get(n.id)
            if head is None or n.id not in readings:
                continue
            if n.role not in (NodeRole.NORMAL, NodeRole.END):
                continue
            seq = self.seq[n.id]
            self.seq[n.id] += 1
            p = Packet(seq=seq, src=n.id, dst=head, payload=readings[n.id],
                       size_bits=c.packet_bits, created_round=r)
            self.packets[p.key] = PacketRecord(r)
            created += 1
            if head == n.id:
                # a head's own reading goes straight into its aggregate
                self.aggregated.add(p.key)
                own[n.id] = [p]
            elif not enqueue(self.queues[n.id], p, r, n):
                self._dropped += 1
        self._own_packets = own
        return created

    def _members_to_heads(self):
        inbox = self._own_packets

        def arrive(tx):
            if tx.key in self.aggregated:
                return
            self.aggregated.add(tx.key)
            inbox.setdefault(tx.hop_trace[-1], []).append(tx)

        for nid in range(self.config.node_count):
            q = self.queues[nid]
            if not q.entries:
                continue
            head = self.head_of.get(nid)
            if head is None or head == nid:
                if head == nid:
                    # a member promoted to head keeps its own backlog local
                    for _, _, p in q.entries:
                        if p.key not in self.aggregated:
                            self.aggregated.add(p.key)
                            inbox.setdefault(nid, []).append(p)
                    q.entries.clear()
                continue
            self._drain_queue(nid, q, head, self.readings, arrive)
        return inbox

    def _heads_to_bs(self, inbox):
        c = self.config
        r = self.round
        delivered = []
        for head in sorted(inbox):
            node = self.nodes[head]
            arrived = inbox[head]
            if not arrived or node.is_dead:
                continue
            bits = c.packet_bits if c.aggregate_mode == "fixed" else c.packet_bits * len(arrived)
            seq = self.seq[head]
            self.seq[head] += 1
            payload = sum(p.payload for p in arrived) / len(arrived)
            agg = Packet(seq=seq, src=head, dst=self.bs, payload=payload, size_bits=bits,
                         created_round=r, contents=tuple(sorted(p.key for p in arrived)))
            enqueue(self.agg_queues[head], agg, r, node)

        def arrive(tx):
            for key in tx.contents:
                rec = self.packets.get(key)
                if rec is not None and rec.delivered_round is None:
                    rec.delivered_round = r
                    delivered.append(r - rec.created_round)

        for nid in range(c.node_count):
            q = self.agg_queues[nid]
            if q.entries:
                self._drain_queue(nid, q, self.bs, {}, arrive)
        return delivered

    # -- control plane ----------------------------------------------------

    def _probe_charges(self):
        c = self.config
        if c.probe_bits <= 0:
            return
        for n in self.nodes:
            if self._can_send(n):
                self._charge(n, transmit_energy(c.radio_range, c.probe_bits, c.energy), "other")
        for n in self.nodes:
            if self._can_hear(n):
                heard = sum(1 for v, _ in self.graph.neighbors(n.id)
                            if v != self.bs and self._can_send(self.nodes[v]))
                if heard:
                    self._charge(n, heard * receive_energy(c.probe_bits, c.energy), "other")

    def _detect(self):
        r = self.round
        g = self.graph
        found = {}
        self._probe_charges()
        sendable = [self._can_send(n) for n in self.nodes]
        for u in self.nodes:
            if not u.is_active or u.energy <= 0 or not u.status.microcontroller_ok:
                continue
            hears = u.status.receiver_ok
            acks = {}
            readings = {}
            lo, hi = g.indptr[u.id], g.indptr[u.id + 1]
            for e in range(lo, hi):
                v = int(g.indices[e])
                if v == self.bs or g.state[v] == 2:
                    continue
                if not sendable[v] or not hears:
                    acks[v] = ACK_SILENT
                    key = (u.id, v)
                    self.silent_streak[key] = self.silent_streak.get(key, 0) + 1
                    continue
                self.silent_streak.pop((u.id, v), None)
                if int(g.edge_of[e]) in self._faulty_links:
                    acks[v] = ACK_CORRUPT
                    continue
                acks[v] = ACK_OK
                if v in self.readings and self.nodes[v].role is not NodeRole.TRAFFIC:
                    readings[v] = self.readings[v]
            battery = u.energy if u.status.battery_ok else 0.0
            streak = {v: self.silent_streak.get((u.id, v), 0) for v, a in acks.items() if a == ACK_SILENT}
            for d in detect(u, acks, readings, battery, self.thresholds, r,
                            own_reading=self.readings.get(u.id), silent_streak=streak):
                if d.verdict is Verdict.HEALTHY:
                    continue
                found.setdefault((d.suspect, d.verdict), d)
        return [found[k] for k in sorted(found, key=lambda k: (k[0], k[1].value))]

    def _notify(self, reporter):
        """Charge one diagnosis broadcast from ``reporter`` to its neighbours."""
        c = self.config
        node = self.nodes[reporter]
        if not self._can_send(node):
            return
        bits = c.notify_bits or c.packet_bits
        if not self._charge(node, transmit_energy(c.radio_range, bits, c.energy), "tx"):
            return
        self._tx_count += 1
        for v, _ in self.graph.neighbors(reporter):
            if v != self.bs and self._can_hear(self.nodes[v]):
                self._charge(self.nodes[v], receive_energy(bits, c.energy), "rx")

    def _recover(self, diags):
        activations = 0
        if diags:
            self._topology_dirty = True
        for d in diags:
            self.events.append((self.round, d.suspect, "", d.verdict.value, "diagnosed"))
            self._notify(d.reporter)
            if d.verdict is Verdict.TRANSMISSION_FAULT:
                continue
            node = self.nodes[d.suspect]
            if node.is_dead:
                continue
            was_head = self.head_of.get(node.id) == node.id
            head = self.head_of.get(node.id)
            cluster = self.clustering.by_head(head) if (self.clustering and head is not None) else None
            before = node.role
            for act in recover(d, cluster, self.graph):
                self.events.append((self.round, act.node, "", d.verdict.value, act.kind))
                if act.kind == "activate_standby":
                    activations += 1
                    if cluster is not None:
                        self.head_of[act.node] = cluster.head
            if node.is_dead:
                self._on_death(node, "declared_dead")
                if was_head:
                    self.need_recluster = True
            elif node.role is NodeRole.END and before is not NodeRole.END:
                # an end node can no longer relay
                self._invalidate(node.id)
                if was_head:
                    self.need_recluster = True
        return activations

    def _bs_hops(self):
        if self._topology_dirty:
            self._topology_dirty = False
            self._hops = self.graph.hops_from(self.bs)
            self._sources_left = self._any_source(self._hops)
        return self._hops

    def _any_source(self, hops):
        # a reading needs a sensing node with a route to the sink and, for an
        # end node that cannot lead a cluster, some other node to head it
        reach = [n for n in self.nodes if hops[n.id] > 0 and self._can_send(n)]
        sources = [n for n in reach if n.role in (NodeRole.NORMAL, NodeRole.END)
                   and n.status.microcontroller_ok]
        leaders = any(n.role in (NodeRole.NORMAL, NodeRole.TRAFFIC) for n in reach)
        return any(n.role is NodeRole.NORMAL for n in sources) or (bool(sources) and leaders)

    def _energy_split(self):
        """(energy of working nodes routed to the sink, energy of all working nodes)."""
        hops = self._bs_hops()
        reach, total = [], []
        for n in self.nodes:
            if self._can_send(n):
                total.append(n.energy)
                if hops[n.id] > 0:
                    reach.append(n.energy)
        return math.fsum(reach), math.fsum(total)

    def reachable_energy(self):
        """Energy held by working, deployed nodes that still have a route to the sink."""
        return self._energy_split()[0]

    def _check_exhausted(self):
        """True once the network can no longer do useful work.

        That is the case when no live node can produce data that could reach
        the sink, when nothing was sensed for a whole recluster period, when
        the sink is cut off from most of the energy left in working nodes
        (the usual end of a multi-hop network: its neighbourhood is spent),
        or when the energy it can still reach has fallen to the battery
        cut-off level, a share ``battery_fraction`` of the initial total.
        """
        if self._idle_rounds >= self.config.recluster_period:
            self.exhausted = True
            return True
        self._bs_hops()
        if not self._sources_left:
            self.exhausted = True
        else:
            reach, total = self._energy_split()
            floor = self.config.battery_fraction * self.ledger.initial_total
            self.exhausted = reach <= floor or reach <= SINK_CUTOFF_SHARE * total
        return self.exhausted

    # -- round loop -------------------------------------------------------

    def run_round(self):
        c = self.config
        r = self.round
        start_energy = self.global_energy()
        report = RoundReport(round=r, global_energy=start_energy, charged=self.ledger.charged,
                             energy_gap=self.ledger.residual_gap(self.nodes))
        self._dropped = 0
        self._round_deaths = 0
        self._tx_count = 0
        if self.need_recluster or r % c.recluster_period == 0:
            self._recluster()
        injected, self._faulty_links = inject(self.campaign, self.nodes, r, plan=self.plan, graph=self.graph)
        if injected:
            self._topology_dirty = True
        for f in injected:
            self.injected.append(f)
            self.events.append((r, f.node, f.circuit, "", "injected"))
        for ps in self.pathsets.values():
            if ps is None:
                continue
            for p in ps.paths:
                if p.status is PathStatus.BUSY:
                    p.status = PathStatus.USABLE
                elif (p.status is PathStatus.FAULTY and p.faulty_until is not None
                      and p.faulty_until < r):
                    p.status = PathStatus.USABLE
                    p.faulty_until = None
        # retry routes that had no path last time
        for key in [k for k, v in self.pathsets.items() if v is None]:
            del self.pathsets[key]
        report.packets_created = self._sense()
        self._idle_rounds = 0 if report.packets_created else self._idle_rounds + 1
        inbox = self._members_to_heads()
        delays = self._heads_to_bs(inbox)
        diags = self._detect()
        self.diagnoses.extend(diags)
        report.activations = self._recover(diags)
        if c.idle_drain > 0:
            for n in self.nodes:
                if n.is_active and n.energy > 0:
                    self._charge(n, c.idle_drain, "other")
        report.packets_delivered = len(delays)
        report.mean_delay = (sum(delays) / len(delays)) if delays else None
        report.diagnoses = len(diags)
        report.deaths = self._round_deaths
        report.packets_dropped = self._dropped
        report.transmissions = self._tx_count
        report.alive_count = sum(1 for n in self.nodes if not n.is_dead)
        self.reports.append(report)
        self.round += 1
        return report

    def run(self):
        c = self.config
        while self.round < c.rounds_max:
            self.run_round()
            if self._check_exhausted():
                self.lifetime = self.round
                break
        return RunResult(
            config=c,
            reports=self.reports,
            packets=self.packets,
            injected=self.injected,
            diagnoses=self.diagnoses,
            events=self.events,
            lifetime=self.lifetime,
            initial_energy=self.ledger.initial_total,
            node_count=c.node_count,
            traces=self.traces,
            death_round=self.death_round,
            final_energy=self.global_energy(),
            final_gap=self.ledger.residual_gap(self.nodes),
        )


def run_round(sim: Simulation):
    return sim.run_round()


def run_scenario(config: ScenarioConfig) -> RunResult:
    return Simulation(config).run()


def run_path_failure_sweep(config, fractions=(0.0, 0.2, 0.4, 0.6, 0.8, 1.0), path_counts=(1, 2, 3)):
    """Throughput with a share of primary paths forced down from round 0.

    Returns ``{k: [throughput per fraction]}`` with failover routing over at
    most ``k`` disjoint paths.
    """
    from .metrics import throughput

    out = {}
    for k in path_counts:
        row = []
        for f in fractions:
            if not 0.0 <= f <= 1.0:
                raise ValueError("fractions must lie in [0, 1]")
            cfg = replace(config, redundancy_mode=FAILOVER, path_count=k, forced_primary_failure=f)
            row.append(throughput(run_scenario(cfg)))
        out[k] = row
    return out
