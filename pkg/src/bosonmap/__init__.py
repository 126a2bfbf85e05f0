"""Lindblad dynamics of N identical d-level emitters via bosonic modes.

Restricting permutation-invariant dynamics to the totally symmetric
subspace is equivalent to evolving N bosons in d modes; this package
enumerates those bosonic sectors, second-quantizes the model operators,
integrates the master equation, and ships a brute-force product-space
oracle that certifies the mapping on desk-scale instances.
"""

from .errors import ConfigError, GuardError, NumericalError
from .fock import CompositeBasis, FockBasis, restrict_composite, sector_dimension
from .integrate import StepStats, adams, dopri5
from .lindblad import (
    HBAR_EV_FS,
    LindbladSystem,
    Trajectory,
    evolve,
    expectation,
    rhs,
)
from .models import (
    Model,
    ModelSpec,
    build_full_model,
    build_model,
    dimension_report,
    franck_condon,
    franck_condon_matrix,
    holstein_tavis_cummings,
    initial_state,
    run_full_model,
    run_model,
    tavis_cummings,
    three_level,
    vsc,
)
from .operators import (
    MBodyCoefficients,
    SparseOperator,
    boson_mode,
    commutator,
    identity_like,
    kron,
    normal_ordered_string,
    second_quantize,
)
from .oracle import (
    FullBasis,
    Isometry,
    build_isometry,
    collective,
    full_density_entries,
    lift_local,
    liouville_density_entries,
    mbody_first_quantized,
    permutation_operator,
    symmetric_density_entries,
    symmetrizer,
)

__version__ = "0.1.0"

__all__ = [
    "HBAR_EV_FS",
    "CompositeBasis",
    "ConfigError",
    "FockBasis",
    "FullBasis",
    "GuardError",
    "Isometry",
    "LindbladSystem",
    "MBodyCoefficients",
    "Model",
    "ModelSpec",
    "NumericalError",
    "SparseOperator",
    "StepStats",
    "Trajectory",
    "adams",
    "boson_mode",
    "build_full_model",
    "build_isometry",
    "build_model",
    "collective",
    "commutator",
    "dimension_report",
    "dopri5",
    "evolve",
    "expectation",
    "franck_condon",
    "franck_condon_matrix",
    "full_density_entries",
    "holstein_tavis_cummings",
    "identity_like",
    "initial_state",
    "kron",
    "lift_local",
    "liouville_density_entries",
    "mbody_first_quantized",
    "normal_ordered_string",
    "permutation_operator",
    "restrict_composite",
    "rhs",
    "run_full_model",
    "run_model",
    "second_quantize",
    "sector_dimension",
    "symmetric_density_entries",
    "symmetrizer",
    "tavis_cummings",
    "three_level",
    "vsc",
]
