"""First-order radio energy model and per-node load accounting."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .core import EnergyParams

DEFAULT_PARAMS = EnergyParams()


def transmit_energy(range_m: float, size_bits: float, params: EnergyParams = DEFAULT_PARAMS) -> float:
    if range_m < 0 or size_bits < 0:
        raise ValueError("range and size must be non-negative")
    return (params.alpha1 + params.alpha2 * range_m ** params.path_loss_n) * size_bits


def receive_energy(size_bits: float, params: EnergyParams = DEFAULT_PARAMS) -> float:
    if size_bits < 0:
        raise ValueError("size must be non-negative")
    return params.alpha3 * size_bits


def single_hop_energy(range_m: float, size_bits: float, params: EnergyParams = DEFAULT_PARAMS) -> float:
    """Cost of one link traversal: sender's transmit plus receiver's receive."""
    return transmit_energy(range_m, size_bits, params) + receive_energy(size_bits, params)


def multipath_energy(n_paths: int, e_tr: float) -> float:
    if n_paths < 1:
        raise ValueError("n_paths must be at least 1")
    return n_paths * e_tr


@dataclass
class LoadRecord:
    node: int
    packets_received: int = 0
    packets_transmitted: int = 0
    round: int = 0

    def __post_init__(self):
        if self.packets_received < 0 or self.packets_transmitted < 0:
            raise ValueError("packet counts must be non-negative")


def node_load(rec: LoadRecord) -> int:
    return rec.packets_received + rec.packets_transmitted


class EnergyLedger:
    """Tracks every joule charged so residual energy can be audited.

    ``charge`` never takes more than a node holds; the amount actually
    drawn is what gets booked, so ``initial - charged == sum(residuals)``
    holds up to float rounding.
    """

    def __init__(self, initial_total: float):
        self.initial_total = initial_total
        self.tx_total = 0.0
        self.rx_total = 0.0
        self.other_total = 0.0
        # residual energy of nodes that died, no longer available to the network
        self.stranded_total = 0.0
        self.loads: dict[int, LoadRecord] = {}

    @property
    def charged(self) -> float:
        return math.fsum((self.tx_total, self.rx_total, self.other_total, self.stranded_total))

    def _load(self, node_id: int) -> LoadRecord:
        rec = self.loads.get(node_id)
        if rec is None:
            rec = self.loads[node_id] = LoadRecord(node_id)
        return rec

    def charge(self, node, amount: float, kind: str = "tx") -> bool:
        """Draw ``amount`` joules from ``node``. Returns False if it ran dry."""
        if amount <= 0:
            return node.energy > 0
        drawn = min(node.energy, amount)
        node.energy -= drawn
        if kind == "tx":
            self.tx_total += drawn
            self._load(node.id).packets_transmitted += 1
        elif kind == "rx":
            self.rx_total += drawn
            self._load(node.id).packets_received += 1
        elif kind == "stranded":
            self.stranded_total += drawn
        else:
            self.other_total += drawn
        if drawn < amount:
            node.energy = 0.0
            return False
        return True

    def write_off(self, node) -> float:
        """Book whatever ``node`` still holds as lost (used when it dies)."""
        amount = node.energy
        if amount > 0:
            self.charge(node, amount, "stranded")
        return amount

    def residual_gap(self, nodes) -> float:
        """Relative mismatch between booked charges and residual energy."""
        residual = math.fsum(n.energy for n in nodes)
        expected = self.initial_total - self.charged
        return abs(expected - residual) / max(self.initial_total, 1e-300)
