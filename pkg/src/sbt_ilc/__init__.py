"""
sbt_ilc - Zero-padded repetitive iterative learning control

Builds noncausal learning laws for stable discrete-time SISO plants in the
lifted (trial-as-vector) domain, certifies their convergence through exact
eigenvalues and the symbol of the symmetric banded Toeplitz transition
matrix, and simulates the learning iteration, including model mismatch.
"""

from sbt_ilc.analysis import (
    GrayBound,
    HinfResult,
    MonotonicityResult,
    StabilityReport,
    SweepRow,
    analyze,
    circulant_eigenvalues,
    gray_bound_check,
    hinf_check,
    monotonicity_check,
    spectral_radius,
    symbol_value,
    tridiagonal_eigenvalues,
    zero_padding_sweep,
)
from sbt_ilc.config import Config
from sbt_ilc.errors import (
    AsymmetryError,
    ConfigError,
    ConvergenceError,
    DimensionError,
    FactorizationError,
    IlcError,
    StructureError,
    UnstablePlantError,
)
from sbt_ilc.factorization import (
    FactoredPlant,
    anticausal_apply,
    factor_plant,
    mirror,
    normalization_constant,
    stable_inverse_apply,
)
from sbt_ilc.laws import (
    Arimoto,
    GenericLaw,
    LearningGain,
    LearningOperators,
    ModifiedRepetitive,
    PaddingMap,
    PDType,
    Prototype,
    TransitionMatrix,
    arimoto_converges,
    arimoto_monotonicity_bound,
    arimoto_transition,
    band_coefficients,
    build_F,
    build_transition,
    pd_transition,
    prototype_fixed_point,
    transition_symbol,
    zpetc_feedforward,
)
from sbt_ilc.lti import (
    BandedCausalMatrix,
    LowerToeplitzMatrix,
    MarkovSequence,
    RationalPlant,
    SBTMatrix,
    ZeroPhaseFilter,
    banded_matvec,
    filter_matrix,
    lift_plant,
    markov_params,
    simulate_response,
)
from sbt_ilc.simulator import (
    IterationTrace,
    MismatchReport,
    Scenario,
    mismatch_study,
    run,
    true_transition,
)

try:
    from sbt_ilc._version import __version__
except ImportError:
    __version__ = "0.0.0.dev0"

__all__ = [
    # Plants and lifted matrices
    "RationalPlant",
    "MarkovSequence",
    "LowerToeplitzMatrix",
    "BandedCausalMatrix",
    "SBTMatrix",
    "ZeroPhaseFilter",
    "markov_params",
    "simulate_response",
    "lift_plant",
    "banded_matvec",
    "filter_matrix",
    # Factorization
    "FactoredPlant",
    "factor_plant",
    "mirror",
    "anticausal_apply",
    "stable_inverse_apply",
    "normalization_constant",
    # Learning laws
    "Arimoto",
    "PDType",
    "Prototype",
    "ModifiedRepetitive",
    "GenericLaw",
    "PaddingMap",
    "LearningGain",
    "LearningOperators",
    "TransitionMatrix",
    "arimoto_transition",
    "pd_transition",
    "arimoto_converges",
    "arimoto_monotonicity_bound",
    "build_F",
    "build_transition",
    "band_coefficients",
    "transition_symbol",
    "prototype_fixed_point",
    "zpetc_feedforward",
    # Analysis
    "HinfResult",
    "GrayBound",
    "MonotonicityResult",
    "StabilityReport",
    "SweepRow",
    "symbol_value",
    "hinf_check",
    "circulant_eigenvalues",
    "tridiagonal_eigenvalues",
    "spectral_radius",
    "gray_bound_check",
    "monotonicity_check",
    "analyze",
    "zero_padding_sweep",
    # Simulation
    "Scenario",
    "IterationTrace",
    "MismatchReport",
    "run",
    "mismatch_study",
    "true_transition",
    # Configuration and errors
    "Config",
    "IlcError",
    "DimensionError",
    "UnstablePlantError",
    "FactorizationError",
    "StructureError",
    "AsymmetryError",
    "ConvergenceError",
    "ConfigError",
    "__version__",
]


# Point __module__ of exported objects at the package so the docs resolve
# `sbt_ilc.SBTMatrix` instead of `sbt_ilc.lti.SBTMatrix`. The original module
# is kept in _module_original_ for source links in docs/conf.py.
def _set_module_for_docs(module_name, module_globals, all_names):
    for name in all_names:
        obj = module_globals.get(name)
        if obj is None or not getattr(obj, "__module__", "").startswith("sbt_ilc"):
            continue
        try:
            if not hasattr(obj, "_module_original_"):
                obj._module_original_ = obj.__module__
            obj.__module__ = module_name
        except (TypeError, AttributeError):
            pass


_set_module_for_docs(__name__, globals(), __all__)
