"""Evaluation metrics and the per-round CSV output."""
from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from bisect import bisect_right
from dataclasses import dataclass

from .faults import EXPECTED_VERDICT

SCHEMA_VERSION = 1
CSV_HEADER = (
    "schema_version", "round", "global_energy_j", "avg_delay_rounds", "pdr",
    "avg_dissipated_j_per_node", "throughput", "diagnosis_rate", "alive_count",
)
EVENT_HEADER = ("round", "node", "class", "verdict", "action")
DIAGNOSIS_WINDOW = 10


def global_energy(state) -> float:
    """Sum of residual energy over all deployed nodes, spares included."""
    nodes = getattr(state, "nodes", state)
    return math.fsum(n.energy for n in nodes)


def packet_delivery_ratio(created: int, delivered: int) -> float:
    if created < 0 or delivered < 0 or delivered > created:
        raise ValueError("need created >= delivered >= 0")
    if created == 0:
        return 1.0
    return delivered / created


def average_dissipated_energy(total_loss: float, node_count: int) -> float:
    if node_count < 1:
        raise ValueError("node_count must be at least 1")
    return total_loss / node_count


def average_delay(records):
    """Mean rounds from creation to delivery, or None with nothing delivered."""
    delays = [r.delivered_round - r.created_round for r in records if r.delivered_round is not None]
    if not delays:
        return None
    return sum(delays) / len(delays)


def _counted(result):
    return [r for r in result.packets.values() if not r.suppressed]


def delivery_counts(result):
    recs = _counted(result)
    return len(recs), sum(1 for r in recs if r.delivered_round is not None)


def throughput(result) -> float:
    """Unique packets delivered over packets created, whole run."""
    created, delivered = delivery_counts(result)
    return packet_delivery_ratio(created, delivered)


def pdr(result) -> float:
    return throughput(result)


def lifetime(result):
    """Round count at which the network ran out of energy or reach."""
    return result.lifetime


def total_consumed(result) -> float:
    nodes_energy = result.reports[-1].global_energy if result.reports else result.initial_energy
    return result.initial_energy - nodes_energy


@dataclass
class MetricsRow:
    round: int
    global_energy: float
    avg_delay: float | None
    pdr: float
    avg_dissipated: float
    throughput: float
    diagnosis_rate: float
    alive_count: int


def metrics_series(result, window=DIAGNOSIS_WINDOW):
    rounds = len(result.reports)
    created_in = [0] * rounds
    delivered_of = [0] * rounds
    delivered_in = [0] * rounds
    delay_sum = [0] * rounds
    for rec in _counted(result):
        if rec.created_round >= rounds:
            continue
        created_in[rec.created_round] += 1
        if rec.delivered_round is not None:
            delivered_of[rec.created_round] += 1
            delivered_in[rec.delivered_round] += 1
            delay_sum[rec.delivered_round] += rec.delivered_round - rec.created_round
    # first correct diagnosis round per (node, verdict)
    first_hit = {}
    for d in result.diagnoses:
        first_hit.setdefault((d.suspect, d.verdict), []).append(d.round)
    inj_rounds = sorted(f.round for f in result.injected)
    hit_rounds = []
    for f in result.injected:
        rs = [r for r in first_hit.get((f.node, EXPECTED_VERDICT[f.circuit]), ()) if 0 <= r - f.round < window]
        if rs:
            hit_rounds.append(min(rs))
    hit_rounds.sort()
    rows = []
    cum_created = cum_delivered = 0
    for i, rep in enumerate(result.reports):
        cum_created += created_in[i]
        cum_delivered += delivered_in[i]
        n_inj = bisect_right(inj_rounds, i)
        n_hit = bisect_right(hit_rounds, i)
        rows.append(MetricsRow(
            round=rep.round,
            global_energy=rep.global_energy,
            avg_delay=(delay_sum[i] / delivered_in[i]) if delivered_in[i] else None,
            pdr=packet_delivery_ratio(created_in[i], delivered_of[i]),
            avg_dissipated=average_dissipated_energy(result.initial_energy - rep.global_energy, result.node_count),
            throughput=packet_delivery_ratio(cum_created, min(cum_delivered, cum_created)),
            diagnosis_rate=(n_hit / n_inj) if n_inj else 1.0,
            alive_count=rep.alive_count,
        ))
    return rows


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def series_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([
            SCHEMA_VERSION, r.round, _fmt(r.global_energy), _fmt(r.avg_delay), _fmt(r.pdr),
            _fmt(r.avg_dissipated), _fmt(r.throughput), _fmt(r.diagnosis_rate), r.alive_count,
        ])
    return buf.getvalue()


def events_csv(events) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EVENT_HEADER)
    for row in events:
        w.writerow(row)
    return buf.getvalue()


def read_series_csv(text):
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_HEADER:
        raise ValueError("unexpected CSV header")
    rows = []
    for rec in reader:
        rows.append(MetricsRow(
            round=int(rec[1]),
            global_energy=float(rec[2]),
            avg_delay=float(rec[3]) if rec[3] else None,
            pdr=float(rec[4]),
            avg_dissipated=float(rec[5]),
            throughput=float(rec[6]),
            diagnosis_rate=float(rec[7]),
            alive_count=int(rec[8]),
        ))
    return rows


def write_atomic(path, text):
    """Write via a temp file in the same directory, then rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
