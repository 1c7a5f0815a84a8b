import pytest

from ftmrs.core import NodeState, Position
from ftmrs.engine import PacketRecord, ScenarioConfig, run_scenario
from ftmrs.faults import FaultCampaign
from ftmrs.metrics import (
    CSV_HEADER,
    average_delay,
    average_dissipated_energy,
    global_energy,
    metrics_series,
    packet_delivery_ratio,
    read_series_csv,
    series_csv,
    write_atomic,
)


def test_global_energy():
    nodes = [NodeState(i, Position(0, 0), 0.5) for i in range(1000)]
    assert global_energy(nodes) == 500.0
    for n in nodes:
        n.energy = 0.0
    assert global_energy(nodes) == 0.0


@pytest.mark.parametrize("created, delivered, want", [(100, 100, 1.0), (0, 0, 1.0), (4, 1, 0.25)])
def test_pdr(created, delivered, want):
    assert packet_delivery_ratio(created, delivered) == want


def test_pdr_rejects_impossible_counts():
    with pytest.raises(ValueError):
        packet_delivery_ratio(1, 2)


def test_dissipated():
    assert average_dissipated_energy(500.0, 1000) == 0.5
    assert average_dissipated_energy(0.0, 10) == 0.0
    with pytest.raises(ValueError):
        average_dissipated_energy(1.0, 0)


def test_delay():
    assert average_delay([PacketRecord(0, 0), PacketRecord(2, 2)]) == 0
    # one packet held back three rounds by a failed primary
    assert average_delay([PacketRecord(5, 8)]) == 3
    assert average_delay([PacketRecord(0, 0), PacketRecord(1, 4)]) == 1.5
    assert average_delay([PacketRecord(0)]) is None


@pytest.fixture(scope="module")
def faulty_run():
    cfg = ScenarioConfig(node_count=60, rounds_max=20, radio_range=70, cluster_count=6, seed=3,
                         faults=FaultCampaign(node_fault_fraction=0.3, spread_rounds=10))
    return run_scenario(cfg)


def test_series_identities(faulty_run):
    rows = metrics_series(faulty_run)
    assert len(rows) == len(faulty_run.reports)
    for row, rep in zip(rows, faulty_run.reports):
        assert row.global_energy == rep.global_energy
        assert row.avg_dissipated == pytest.approx((faulty_run.initial_energy - rep.global_energy) / 60)
        assert 0.0 <= row.pdr <= 1.0 and 0.0 <= row.diagnosis_rate <= 1.0
    assert rows[0].global_energy == 30.0


def test_csv_round_trip(faulty_run):
    rows = metrics_series(faulty_run)
    text = series_csv(rows)
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert read_series_csv(text) == rows


def test_missing_delay_is_empty_cell():
    from ftmrs.metrics import MetricsRow

    text = series_csv([MetricsRow(0, 1.0, None, 1.0, 0.0, 1.0, 1.0, 3)])
    assert text.splitlines()[1] == "1,0,1.0,,1.0,0.0,1.0,1.0,3"


def test_write_atomic(tmp_path):
    target = tmp_path / "sub" / "out.csv"
    write_atomic(target, "a,b\n")
    assert target.read_text() == "a,b\n"
    write_atomic(target, "c\n")
    assert target.read_text() == "c\n"
    assert [p.name for p in target.parent.iterdir()] == ["out.csv"]
