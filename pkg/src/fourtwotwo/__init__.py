"""Exact simulation and analysis of the [[4,2,2]] error-detection experiment."""
from .code import CODE, LogicalOutcome, PauliString, RejectedShot, commutes, decode_logical, pauli_multiply
from .sim import (
    Circuit,
    DensityMatrix,
    GateOp,
    NoiseModel,
    StateVector,
    TransferMatrix,
    apply_gate,
    apply_pauli,
    apply_spam,
    correct_spam,
    measure_distribution,
    run,
)
from .experiments import (
    ExperimentPlan,
    FaultReport,
    SelectionReport,
    build_prep,
    build_stabilizer,
    enumerate_single_faults,
    postselect,
    run_injection_campaign,
    run_miscal_sweep,
)
from .analysis import (
    ConfigScheme,
    CurvePoint,
    ErrorConfiguration,
    analytic_no_intrinsic,
    brute_force_oracle,
    fit_noise_params,
    logical_error_rate,
    physical_baseline,
    statistical_importance,
)

__version__ = "0.1.0"
