"""Cooperative Jahn-Teller chain simulator.

Layered API: model parameters and coupling matrices (:mod:`cjt.model`,
:mod:`cjt.geometry`, :mod:`cjt.lab`), collective modes (:mod:`cjt.modes`),
the variational mean-field solver (:mod:`cjt.meanfield`), Gaussian
fluctuations (:mod:`cjt.gaussian`) and the exact small-chain oracle
(:mod:`cjt.ed`).  The command line lives in :mod:`cjt.cli`.
"""

from .errors import (
    CjtError,
    ConfigError,
    ConvergenceError,
    DimensionCapError,
    UnstableBathError,
    UnstableExpansionPointError,
)
from .gaussian import (
    FluctuationVariances,
    GaussianHamiltonian,
    GaussianSpectrum,
    adiabatic_gap,
    bogoliubov_diagonalize,
    build_gaussian_hamiltonian,
    charge_conserving_gap,
    fluctuation_sweep,
    fluctuation_variances,
)
from .geometry import (
    ChainGeometry,
    build_couplings,
    coulomb_couplings,
    equilibrium_positions,
    homogeneous_couplings,
)
from .lab import LabParams, ca40_lab_params, from_lab_params
from .meanfield import (
    CriticalCouplingEstimate,
    MeanFieldSolution,
    SiteObservables,
    critical_coupling_estimate,
    detect_transition,
    exchange_matrix,
    mf_observables,
    solve_mean_field,
    sweep_mean_field,
)
from .model import (
    ChiralAmplitudePair,
    CouplingMatrix,
    ModelParams,
    apply_staggered_transform,
    u1_charge_operator,
)
from .modes import PhononSpectrum, diagonalize_bath
from .ed import EDConfig, EDConvergenceReport, EDResult, build_hamiltonian, convergence_scan, ground_state

__version__ = "0.1.0"
