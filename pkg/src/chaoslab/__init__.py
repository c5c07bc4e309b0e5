"""chaoslab: quantum-chaos diagnostics for a squeezing-enhanced qubit-cavity model.

The package simulates a weakly coupled qubit-cavity system whose two-photon
drive maps it, in the squeezed-light frame, onto a strongly coupled
qubit-oscillator model, and computes the standard chaos indicators for it:
Loschmidt echo, out-of-time-order correlator, linear entanglement entropy,
recurrence probability, Husimi distributions, plus the mean-field classical
limit with Poincare sections.
"""

from .diagnostics import (EntropyMap, HusimiGrid, OtocConfig, TimeSeries,
                          average_entropy, average_entropy_converged,
                          entropy_map, entropy_series, fidelity,
                          fidelity_vs_r_scan, husimi_of_density,
                          husimi_snapshot, linear_entropy, loschmidt_echo,
                          lyapunov_fit, otoc_direct, otoc_variance, recurrence,
                          scrambling_time, time_average)
from .errors import (BlochDomainError, ChaosLabError, GridCoverageError,
                     NumericalConvergenceError, PhysicsPreconditionError,
                     TruncationError)
from .hilbert import (FockTruncation, OperatorSet, PhasePoint, bloch_state,
                      build_operators, coherent_tail_mass, expectation,
                      glauber_state, labels_to_phase, partial_trace_cavity,
                      partial_trace_qubit, phase_to_labels, product_state,
                      tensor, variance)
from .model import (DerivedParams, SystemParams, bogoliubov_residual,
                    build_h_eff, build_h_err, build_h_lab, build_h_rabi,
                    build_h_rotated, derive_params, rotation_unitary,
                    squeeze_unitary, squeezed_vacuum_tail_mass,
                    verify_frame_equivalence)
from .presets import (INITIAL_STATES, PARAMETER_SETS, SHELL_ENERGIES,
                      get_initial_state, get_params)
from .propagation import (SpectralPropagator, diagonalize, evolve,
                          evolve_series, evolve_time_dependent)
from .semiclassical import (PoincareSection, ShellSolution, Trajectory,
                            classical_energy, classical_gradient,
                            closed_curve_statistic, default_seed_grid,
                            hamiltons_rhs, integrate_trajectory,
                            poincare_section, section_scan, solve_p2_on_shell)

__version__ = "0.1.0"
