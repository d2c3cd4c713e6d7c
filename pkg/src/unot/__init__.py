"""Characterization and stabilization of approximate universal flip operations.

Subpackages split by concern: `rotation` for axis-angle algebra, `fidelity`
for closed-form (F, Delta) statistics, `circuit` for ladder realizations,
`oracle` for Monte-Carlo reference estimates, `evolve` for the
differential-evolution feedback loop, and `cli` for the experiment runner.
"""

from .circuit import (
    LadderCircuit,
    StochasticMap,
    compensated_four_gate_map,
    misaligned_three_gate_map,
    optimal_stochastic_map,
    optimal_three_qubit_circuit,
    simulate_full,
    stochastic_map_from_circuit,
    weights_from_preps,
)
from .evolve import (
    DeConfig,
    DeState,
    GeneratorBasis,
    NoiseModel,
    channel_from_unitary,
    control_stats,
    fitness,
    gell_mann_basis,
    optimal_controls,
    run_feedback,
    unitary_from_controls,
)
from .fidelity import (
    AffineBlochChannel,
    FidelityStats,
    affine_channel_stats,
    one_qubit_stats,
    pair_covariance,
    pointwise_fidelity,
    region_membership,
    stochastic_map_stats,
    three_qubit_avg_fidelity,
)
from .oracle import McEstimate, SeededSampler, mc_stats, sample_bloch, sample_unitary
from .rotation import (
    OneQubitGate,
    gate_from_unitary,
    rotation_from_gate,
    rotation_from_unitary,
    unit_axis,
    unitary_from_gate,
)

__version__ = "0.1.0"

__all__ = [
    "AffineBlochChannel",
    "DeConfig",
    "DeState",
    "FidelityStats",
    "GeneratorBasis",
    "LadderCircuit",
    "McEstimate",
    "NoiseModel",
    "OneQubitGate",
    "SeededSampler",
    "StochasticMap",
    "affine_channel_stats",
    "channel_from_unitary",
    "compensated_four_gate_map",
    "control_stats",
    "fitness",
    "gate_from_unitary",
    "gell_mann_basis",
    "mc_stats",
    "misaligned_three_gate_map",
    "one_qubit_stats",
    "optimal_controls",
    "optimal_stochastic_map",
    "optimal_three_qubit_circuit",
    "pair_covariance",
    "pointwise_fidelity",
    "region_membership",
    "rotation_from_gate",
    "rotation_from_unitary",
    "run_feedback",
    "sample_bloch",
    "sample_unitary",
    "simulate_full",
    "stochastic_map_from_circuit",
    "stochastic_map_stats",
    "three_qubit_avg_fidelity",
    "unit_axis",
    "unitary_from_gate",
    "weights_from_preps",
]
