"""Desk-scale quantum control toolkit for a single spin-F system.

Designs, simulates, and evaluates control waveforms for the Hamiltonian
H = larmor_rate (bx fx + by fy) + nonlinear_rate fx^2, including a two-stage
yield optimizer, a master-equation noise model, an adiabatic spin-squeezing
protocol, spherical Wigner functions, and batch evaluation tools. See the
``spinctl`` command-line entry point for file-based workflows.
"""

from .spincore import (QuantumState, Rotation, SpinSystem, SqueezingResult,
                       UndefinedSqueezingError, build_spin_system, expectation,
                       fidelity, lie_closure_dimension, rotation_operator,
                       squeezing_parameter, stretched_state, variance,
                       yield_mixed, yield_pure)
from .control import (ControlParams, ControlWaveform, FilterSpec, InitialPrep,
                      RenderedDrive, default_filter, default_initial_state,
                      default_params, hamiltonian_at, prepare_initial,
                      render_waveform, target_library, target_names)
from .dynamics import (DegenerateGroundStateError, GroundStateResult, Inhomogeneity,
                       NoiseModel, Trajectory, default_noise,
                       instantaneous_ground_state, propagate_master, propagate_pure,
                       propagate_with_snapshots)
from .optimize import (DesignResult, LineSearch, OptimizationResult, OptimizerConfig,
                       design_control, stage1_gradient, stage1_optimize, stage2_refine)
from .squeezing import (GroundStateXiRow, RampSpec, SqueezeReport, SweepRow,
                        default_ramp, default_sweep_omegas, derive_ramp_time,
                        ground_state_xi, min_ground_state_xi_normalized,
                        run_adiabatic, sweep_final_field)
from .wigner import (MultipoleDecomposition, WignerGrid, multipole_decompose,
                     wigner_at, wigner_grid)
from .analysis import (BatchRecord, BiasResult, RotationCorrection, batch_evaluate,
                       find_bias_sigma, gaussian_displacement_bias, histogram_table,
                       optimize_rotation_overlap, synthetic_batch)

__version__ = "0.1.0"
