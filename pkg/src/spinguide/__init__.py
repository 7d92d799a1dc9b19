"""Collective decay, subradiance and excitation transport in a waveguide.

Ensembles of two-level emitters coupled to one guided mode interact through
the periodic exchange and collective-decay kernels of the mode.  The package
provides an exact master-equation solver over products of collective-spin
sectors, an analytical Dicke-state toolbox, and an automatically derived
second-order cumulant engine that scales to millions of atoms, plus the
scan/metric machinery used to study the subradiance threshold and the
superradiant energy transfer between far-apart ensembles.
"""

__version__ = "0.1.0"

from .coupling import (
    CouplingMatrices,
    EnsembleLayout,
    SubEnsemble,
    WaveguideModel,
    build_matrices,
    gamma_ij,
    jump_operator_weights,
    omega_ij,
    two_ensemble_layout,
)
from .cumulant import MomentSystem, adjoint_derivative, cumulant_close, derive_system
from .dicke import (
    ClebschGordanTable,
    DickeDistribution,
    clebsch_gordan,
    decompose_initial_state,
    predicted_lost_excitation,
    saturation_limit,
)
from .exact import (
    CollectiveBasis,
    CollectiveState,
    Liouvillian,
    build_liouvillian,
    collective_operators,
    evolve,
    initial_product_state,
)
from .ode import (
    EventSpec,
    IntegratorConfig,
    ObservableMap,
    Trajectory,
    detect_event,
    detect_steady_state,
    integrate,
)

__all__ = [
    "WaveguideModel", "SubEnsemble", "EnsembleLayout", "CouplingMatrices",
    "omega_ij", "gamma_ij", "build_matrices", "jump_operator_weights",
    "two_ensemble_layout",
    "CollectiveBasis", "CollectiveState", "Liouvillian", "build_liouvillian",
    "collective_operators", "initial_product_state", "evolve",
    "clebsch_gordan", "ClebschGordanTable", "DickeDistribution",
    "decompose_initial_state", "predicted_lost_excitation", "saturation_limit",
    "MomentSystem", "derive_system", "adjoint_derivative", "cumulant_close",
    "IntegratorConfig", "EventSpec", "ObservableMap", "Trajectory",
    "integrate", "detect_event", "detect_steady_state",
]
