"""Measurement-driven simulation and synthesis of nonunitary gates."""

from __future__ import annotations

from .errors import (
    AnnihilatedStateError,
    CircuitError,
    CircuitParseError,
    DegenerateBranchError,
    DomainError,
    IrreversibleError,
    MeasurementError,
    NetlistError,
    NuqcError,
    SearchBudgetError,
    ShapeError,
    UnsupportedInstanceError,
)
from .gates import GateSpec, from_matrix, normalize_gate, parse_label
from .measure import (
    MeasurementPair,
    ProtocolResult,
    ReversalPolicy,
    analytic_success,
    build_pair,
    build_reversal,
    run_with_reversal,
    sample,
    sample_reversal,
    success_prob,
)
from .qstate import StateVector, basis_state, fidelity, normalize, uniform_state
from .circuit import (
    CircuitProgram,
    CircuitStep,
    EnsembleStats,
    RunRecord,
    StepRecord,
    parse,
    parse_file,
    run_branch,
    run_ensemble,
    run_sampled,
)
from .synth import (
    GateNetlist,
    NetlistStep,
    approximate_n1,
    decompose_cn1,
    decompose_mcn1_ancilla,
    decompose_mcn1_bare,
    factor_diagonal,
    netlist_matrix,
    read_netlist,
    realized_operator,
    reconstruction_residual,
    svd_split,
    synthesize,
    write_netlist,
)
from .apps import (
    NandNetlist,
    QubitSavings,
    SearchResult,
    TruthTableOracle,
    abrams_lloyd_run,
    compile_nand,
    evaluate_netlist,
    parse_nand_netlist,
    parse_truth_table,
    qubit_savings,
    search_program,
)

__version__ = "0.1.0"

__all__ = [
    "AnnihilatedStateError",
    "CircuitError",
    "CircuitParseError",
    "CircuitProgram",
    "CircuitStep",
    "DegenerateBranchError",
    "DomainError",
    "EnsembleStats",
    "GateNetlist",
    "GateSpec",
    "IrreversibleError",
    "MeasurementError",
    "MeasurementPair",
    "NandNetlist",
    "NetlistError",
    "NetlistStep",
    "NuqcError",
    "ProtocolResult",
    "QubitSavings",
    "ReversalPolicy",
    "RunRecord",
    "SearchBudgetError",
    "SearchResult",
    "ShapeError",
    "StateVector",
    "StepRecord",
    "TruthTableOracle",
    "UnsupportedInstanceError",
    "abrams_lloyd_run",
    "analytic_success",
    "approximate_n1",
    "basis_state",
    "build_pair",
    "build_reversal",
    "compile_nand",
    "decompose_cn1",
    "decompose_mcn1_ancilla",
    "decompose_mcn1_bare",
    "evaluate_netlist",
    "factor_diagonal",
    "fidelity",
    "from_matrix",
    "netlist_matrix",
    "normalize",
    "normalize_gate",
    "parse",
    "parse_file",
    "parse_label",
    "parse_nand_netlist",
    "parse_truth_table",
    "qubit_savings",
    "read_netlist",
    "realized_operator",
    "reconstruction_residual",
    "run_branch",
    "run_ensemble",
    "run_sampled",
    "run_with_reversal",
    "sample",
    "sample_reversal",
    "search_program",
    "success_prob",
    "svd_split",
    "synthesize",
    "uniform_state",
    "write_netlist",
    "__version__",
]
