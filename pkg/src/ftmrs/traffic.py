"""First-come-first-served transmit queues with a per-path slot interval."""
from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass, field

from .routing import PathStatus

_arrivals = itertools.count()


@dataclass
class TxQueue:
    capacity: int | None = None
    entries: list = field(default_factory=list)  # (order, arrival_round, packet)
    last_tx_round: dict = field(default_factory=dict)  # path slot -> round
    losses: int = 0
    backpressure: int = 0

    def __len__(self):
        return len(self.entries)

    def packets(self):
        return [p for _, _, p in self.entries]

    def requeue(self, packet, order, arrival_round):
        """Put a failed packet back at its original FCFS position."""
        bisect.insort(self.entries, (order, arrival_round, packet), key=lambda e: e[0])


def enqueue(q: TxQueue, packet, round_index, node=None) -> bool:
    """Append ``packet``; returns False when it was dropped instead."""
    if node is not None and node.is_dead:
        q.losses += 1
        return False
    if q.capacity is not None and len(q.entries) >= q.capacity:
        q.losses += 1
        return False
    q.entries.append((next(_arrivals), round_index, packet))
    return True


def schedule(q: TxQueue, path_set, round_index, slot_gap=1, copies=1, retry_copies=None):
    """Pick this round's transmissions from the head of ``q``.

    Each packet takes the first path, in failover order, that is usable and
    whose previous transmission is at least ``slot_gap`` rounds old. With
    ``copies`` > 1 the packet also goes out on the next eligible paths; a
    packet that already failed once (``attempts`` > 0) goes out on up to
    ``retry_copies`` paths instead. Used paths turn BUSY for the rest of the
    round. Returns a list of ``(packet, path, slot, order, arrival_round)``.
    """
    if retry_copies is None:
        retry_copies = copies
    if slot_gap < 1:
        raise ValueError("slot_gap must be at least 1")
    out = []
    if path_set is None:
        if q.entries:
            q.backpressure += 1
        return out
    while q.entries:
        order, arrival, packet = q.entries[0]
        want = retry_copies if packet.attempts > 0 else copies
        chosen = []
        for slot, path in enumerate(path_set.paths):
            if path.status is not PathStatus.USABLE:
                continue
            last = q.last_tx_round.get(slot)
            if last is not None and round_index - last < slot_gap:
                continue
            chosen.append((slot, path))
            if len(chosen) == want:
                break
        if not chosen:
            q.backpressure += 1
            break
        q.entries.pop(0)
        for slot, path in chosen:
            path.status = PathStatus.BUSY
            q.last_tx_round[slot] = round_index
            out.append((packet, path, slot, order, arrival))
    return out
