"""Graph tensor-network state, message passing, gauged truncation, diagnostics."""

from .bp import (BPCache, BPError, bethe_norm, bp_energy, local_expectation,
                 log_bethe_norm, min_message_eigenvalue, run_bp)
from .entropy import CutSpec, EdgeSpectrum, cut_entropy, default_bisection_cut, edge_entropy
from .evolve import EvolveResult, GateError, StepRecord, TruncationInfo, apply_gate, evolve, refresh_bp
from .gates import CompileError, Gate, cnot, compile_circuit, group_by_stage, rx, rz, zz_rotation
from .state import (TNError, TNState, init_plus, load_state, norm_squared_dense,
                    product_state, save_state, to_dense)

__all__ = [
    "BPCache", "BPError", "bethe_norm", "bp_energy", "local_expectation",
    "log_bethe_norm", "min_message_eigenvalue", "run_bp",
    "CutSpec", "EdgeSpectrum", "cut_entropy", "default_bisection_cut", "edge_entropy",
    "EvolveResult", "GateError", "StepRecord", "TruncationInfo", "apply_gate",
    "evolve", "refresh_bp",
    "CompileError", "Gate", "cnot", "compile_circuit", "group_by_stage", "rx", "rz",
    "zz_rotation",
    "TNError", "TNState", "init_plus", "load_state", "norm_squared_dense",
    "product_state", "save_state", "to_dense",
]
