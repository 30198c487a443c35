"""Repeated quantum interactions: channels, spectra, invariant states, random ensembles."""

from .channels import (
    DensityMatrix,
    DualMap,
    KrausChannel,
    StinespringChannel,
    Superoperator,
    apply_kraus,
    choi_matrix,
    choi_rank,
    compose,
    compose_superoperators,
    dual_channel,
    kraus_from_stinespring,
    stinespring_apply,
    superoperator_of,
)
from .config import (
    FIXED_POINT_DEFAULT,
    TOL_DEFAULT,
    TOL_PROFILES,
    TOL_STRICT,
    FixedPointConfig,
    ToleranceConfig,
)
from .dynamics import (
    Trajectory,
    convergence_diagnostics,
    run_fixed,
    run_iid_unitary,
    run_random_env,
    tilde_unitary_sequence,
    twirl_mean,
)
from .errors import (
    ConfigError,
    DimensionMismatchError,
    DriftError,
    MaxIterationsExceeded,
    NumericalError,
    OperatorCountError,
    RepintError,
    ValidationError,
)
from .sampling import (
    DiracAt,
    EnsembleSpec,
    FixedSpectrumHaarBasis,
    InducedPure,
    RngStream,
    eigenvalue_batch,
    ginibre,
    haar_unitary,
    induced_density,
    random_channel,
    random_env_density,
    sample_asymptotic,
)
from .spectral import (
    IrreducibilityReport,
    SpectralReport,
    channel_spectrum,
    generalized_shemesh,
    invariant_state,
    irreducibility_check,
    one_plus_phi_power_probe,
    shemesh_common_eigenvector,
    strict_positivity_probe,
)

__version__ = "0.1.0"
