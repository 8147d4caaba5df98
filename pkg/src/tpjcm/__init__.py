"""Two-photon nondegenerate Jaynes-Cummings dynamics with a Kerr medium.

Three independent routes to the same observables: exact evolution in a
truncated two-mode Fock space (hilbert), closed-form Rabi series for the
atomic populations (series), and direct integration of the relevant-operator
hierarchy (hierarchy). They are meant to be run against each other.
"""

from .cli import RunConfig, compute_series
from .hierarchy import (Constant, Envelope, HierarchyConvergenceError, RectPulse,
                        ROState, Sinusoidal, default_cutoff, init_ro, integrate,
                        integrate_tables, rhs)
from .hilbert import (ExcitationBlock, StateVector, Truncation, TruncationLeakageError,
                      assemble_state, basis_state, block_decompose, build_hamiltonian,
                      charges, evolve_exact, expectation_energy, expectation_n,
                      expectation_quadrature, iter_evolve, ro_expectation)
from .model import ModelParams
from .observables import (CSV_COLUMNS, ObservableSeries, detect_revivals, from_states,
                          g2_intermodes, read_csv, write_csv)
from .series import (RabiTable, SeriesCoefficients, SeriesConvergenceError,
                     beta_squared, block_detuning, general_ro_series,
                     population_coherent, population_pair_coherent,
                     population_squeezed, series_observables)
from .stark import (EquivalenceReport, KerrAsymmetryError, StarkParams,
                    iter_evolve_stark, map_kerr_to_stark, stark_diagonal_energies,
                    verify_equivalence)
from .states import (Coherent, FieldStateSpec, JointPhotonDistribution, PairCoherent,
                     SqueezedVacuum, amplitudes, default_truncation, factorial_moment,
                     mean_photons, moment_table, pair_xi_for_mean, squeezed_r_for_mean)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
