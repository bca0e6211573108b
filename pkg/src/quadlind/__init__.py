"""Global master equations for quadratic fermionic and bosonic lattices.

The pipeline runs ``quadratic_model -> bogoliubov -> environment ->
lindblad_builder`` and then either the closed forms in ``dynamics`` and
``transport`` or the brute-force ``oracle``.
"""
from .bogoliubov import (
    BogoliubovDecomposition,
    classify_spectrum,
    diagonalize,
    reconstruct_residual,
    verify_canonical,
)
from .dynamics import (
    CorrelationSet,
    QuasiparticleState,
    density_density,
    evolve_two_point,
    quasiparticle_correlations,
    real_space_correlations,
    steady_theta,
)
from .environment import Bath, FlatDensity, OhmicDensity, TabulatedDensity, distribution
from .errors import (
    CapabilityError,
    ConfigurationError,
    DivergenceError,
    InstabilityError,
    NumericalFailure,
    PhysicsError,
    QuadlindError,
    UnsupportedError,
)
from .lindblad_builder import EffectiveModel, build_effective_model, local_rates
from .quadratic_model import (
    BOSON,
    FERMION,
    CouplingRegion,
    QuadraticHamiltonian,
    Statistics,
    harmonic_chain,
    kitaev_chain,
    standard_model,
    tight_binding_chain,
    validate,
)
from .transport import (
    LinearResponsePoint,
    anomaly_factors,
    energy_current,
    heat_current,
    onsager_matrix,
    particle_current,
    quasiparticle_current,
    transport_report,
)

__version__ = "0.1.0"
