"""Diatomic molecules in classical dc/ac fields.

Field-free electronic models (:mod:`diatom.electronic`), field frames and
profiles (:mod:`diatom.fields`), sum-over-states response
(:mod:`diatom.perturbation`), exact dc/Floquet dressed states
(:mod:`diatom.floquet`) and effective nuclear dynamics
(:mod:`diatom.rovib`). Atomic units throughout.
"""

__version__ = "0.1.0"

from .electronic import (
    ElectronicModel,
    ElectronicState,
    NuclearData,
    Symmetry,
    builtin_model,
    load_model,
    model_from_dict,
)
from .errors import (
    ConfigError,
    DegeneracyError,
    DiatomError,
    DomainError,
    NumericalError,
    PropagationError,
    ResonanceError,
    TrackingError,
)
from .fields import FieldSpec, field_at, interaction_energy, rotation_matrix
from .floquet import dc_adiabatic_states, floquet_matrix, monodromy_quasienergies, quasienergies
from .perturbation import (
    ac_surface_correction,
    dc_surface_correction,
    dynamic_polarizability,
    gauge_discrepancy_report,
    static_polarizability,
)
from .rovib import (
    RadialGrid,
    RotorBasis,
    build_effective,
    com_trap_dynamics,
    cos2_theta_matrix,
    cos_theta_matrix,
    expectation,
    propagate,
    vibrational_eigenstates,
)
