"""Cost-optimal single-qubit gate synthesis over Clifford + hierarchy Z-rotations."""

from hiersynth.costs import CostModel, base_gate_cost, catalyst_direct_cost, catalyst_magic_cost, distillation_cost
from hiersynth.experiment import ExperimentSpec, FitResult, ols_fit, run_experiment, scaling_reduction
from hiersynth.kdindex import SpatialIndex, index_database
from hiersynth.proportions import ProportionParams, empirical_proportions
from hiersynth.psu2 import GateElement, GateSetSpec, build_gate_set, parse_gate, trace_distance
from hiersynth.seqdb import SequenceDatabase, generate, load, save
from hiersynth.synth import GrowthPolicy, batch_synthesize, synthesize, verify

__version__ = "0.1.0"
