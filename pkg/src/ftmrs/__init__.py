"""Round-based simulator of fault-tolerant multipath routing in clustered WSNs."""
from .core import EnergyParams, HardwareStatus, NodeRole, NodeState, Packet, Position, classify_role
from .energy import EnergyLedger, multipath_energy, receive_energy, single_hop_energy, transmit_energy
from .engine import (
    DUPLICATE,
    FAILOVER,
    RunResult,
    ScenarioConfig,
    Simulation,
    run_path_failure_sweep,
    run_scenario,
)
from .faults import FaultCampaign, Verdict, detect, diagnosis_rate, inject, recover
from .kernels import BACKEND
from .routing import NoRoute, Path, PathSet, PathStatus, build_path_set, select_path, shortest_path
from .topology import NetworkGraph, build_graph, deploy, elect_heads, form_clusters

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "DUPLICATE", "FAILOVER", "EnergyLedger", "EnergyParams", "FaultCampaign",
    "HardwareStatus", "NetworkGraph", "NoRoute", "NodeRole", "NodeState", "Packet", "Path",
    "PathSet", "PathStatus", "Position", "RunResult", "ScenarioConfig", "Simulation", "Verdict",
    "build_graph", "build_path_set", "classify_role", "deploy", "detect", "diagnosis_rate",
    "elect_heads", "form_clusters", "inject", "multipath_energy", "receive_energy", "recover",
    "run_path_failure_sweep", "run_scenario", "select_path", "shortest_path", "single_hop_energy",
    "transmit_energy",
]
