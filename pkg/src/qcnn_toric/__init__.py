"""QCNN-style error-correcting readout of toric-code phases.

Stabilizer-circuit convolution, classical pooling of syndrome grids and
exact small-lattice ground states, plus the sweep harness that ties them
together.
"""

__version__ = "0.1.0"

from .lattice import LatticeGeometry, build_pooling_schedule, build_torus, logical_operators
from .circuits import GateSequence, build_convolution, build_prep_circuit
from .pauli_frame import NoiseModel, PauliFrame, conjugate_through, syndromes_direct
from .pooling import LayerOutputs, SyndromeGrid, apply_pooling_layer, layer_output, run_pipeline
from .stabilizer_sim import Tableau, verify_convolution_identity
from .groundstate import FieldParams, SolverError, solve_ground_state, sample_snapshots
from .harness import (
    ExperimentConfig,
    SweepResult,
    emit_results,
    estimate_threshold,
    run_field_sweep,
    run_noise_sweep,
)

__all__ = [
    "__version__",
    "LatticeGeometry",
    "build_torus",
    "build_pooling_schedule",
    "logical_operators",
    "GateSequence",
    "build_prep_circuit",
    "build_convolution",
    "PauliFrame",
    "NoiseModel",
    "conjugate_through",
    "syndromes_direct",
    "SyndromeGrid",
    "LayerOutputs",
    "apply_pooling_layer",
    "layer_output",
    "run_pipeline",
    "Tableau",
    "verify_convolution_identity",
    "FieldParams",
    "SolverError",
    "solve_ground_state",
    "sample_snapshots",
    "ExperimentConfig",
    "SweepResult",
    "run_noise_sweep",
    "run_field_sweep",
    "estimate_threshold",
    "emit_results",
]
