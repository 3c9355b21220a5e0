"""Redundancy selection game for MDS-coded slotted non-persistent CSMA."""

from mdsgame.coding import CodeParams, Packet, decode, encode
from mdsgame.model import ModelOutputs, ModelVariant, NetworkParams, evaluate
from mdsgame.sim import SimConfig, SimResult, simulate
from mdsgame.game import GameConfig, EquilibriumReport, best_response_dynamics, sweep_symmetric

__version__ = "0.1.0"

__all__ = [
    "CodeParams",
    "Packet",
    "encode",
    "decode",
    "NetworkParams",
    "ModelVariant",
    "ModelOutputs",
    "evaluate",
    "SimConfig",
    "SimResult",
    "simulate",
    "GameConfig",
    "EquilibriumReport",
    "best_response_dynamics",
    "sweep_symmetric",
]
