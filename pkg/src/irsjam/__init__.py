"""Secrecy-rate maximization with IRS reflect beamforming and AN jamming."""

from .channel import ChannelSet, build_scenario, eve_positions
from .cvxsolver import (
    AffineForm,
    EpiRow,
    LogTerm,
    LogTraceProgram,
    SolverReport,
    solve,
)
from .harness import (
    BASELINES,
    RunRecord,
    ScenarioConfig,
    SweepCell,
    algorithm2,
    baseline_flags,
    config_from_dict,
    emit_csv,
    sweep,
)
from .irsopt import (
    ReflectRun,
    align_init,
    extract_v,
    optimize_reflect,
    scan_init,
    solve_V,
    update_z,
)
from .numerics import unit_phases
from .secrecy import (
    ReflectVector,
    TxSolution,
    passive_off_row,
    secrecy_objective,
    secrecy_value,
)
from .txopt import TxRun, algorithm1, recover_rank1, update_t

__version__ = "0.1.0"

__all__ = [
    "AffineForm",
    "BASELINES",
    "ChannelSet",
    "EpiRow",
    "LogTerm",
    "LogTraceProgram",
    "ReflectRun",
    "ReflectVector",
    "RunRecord",
    "ScenarioConfig",
    "SolverReport",
    "SweepCell",
    "TxRun",
    "TxSolution",
    "algorithm1",
    "algorithm2",
    "align_init",
    "baseline_flags",
    "build_scenario",
    "config_from_dict",
    "emit_csv",
    "eve_positions",
    "extract_v",
    "optimize_reflect",
    "passive_off_row",
    "recover_rank1",
    "scan_init",
    "secrecy_objective",
    "secrecy_value",
    "solve",
    "solve_V",
    "sweep",
    "unit_phases",
    "update_t",
    "update_z",
]
