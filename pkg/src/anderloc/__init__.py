"""Localization diagnostics for quasi-1D Anderson-Bernoulli operators.

The package turns the transfer-matrix machinery of matrix-valued random
Schroedinger operators on the line into executable computations: density
certificates for the group generated by the binary transfer matrices,
critical-energy scans, Lyapunov spectrum estimation, and finite-volume
spectral statistics (integrated density of states, eigenfunction decay).
"""

__version__ = "0.1.0"

from .errors import (
    AnderlocError,
    ConfigError,
    DimensionError,
    FactorizationError,
    GridError,
    InstabilityError,
    NumericError,
    OracleRangeError,
    ScanRangeError,
    SingularMatrixError,
    SizeGuardError,
)
from .linalg import (
    SpElement,
    as_symmetric,
    bracket,
    exp_matrix,
    is_hamiltonian,
    is_symplectic,
    qr_pos,
    sp_dim,
    standard_form,
    sym_eigenvalues,
    vectorize_sp,
)
from .model import (
    DEFAULT_RHO,
    DisorderSpec,
    EnergyInterval,
    ModelParams,
    SpectralBounds,
    binary_cells,
    cell_matrix,
    energy_interval,
    generator,
    generator_norm,
    sample_cell,
    sample_path,
    spectral_bounds,
    transfer,
)
from .furstenberg import (
    ClosureReport,
    CriticalBracket,
    CriticalEnergySet,
    DensityCertificate,
    density_certificate,
    lie_closure,
    scan_critical_energies,
    tridiagonal_witness,
)
from .lyapunov import (
    EstimatorConfig,
    LyapunovSpectrum,
    SeparabilityResult,
    exterior_log_norm,
    lyapunov_spectrum,
    qr_log_diag_sums,
    separability_scan,
)
from .spectrum import (
    BandedSymmetric,
    DecayReport,
    FiniteRestriction,
    IDSCurve,
    boundary_block,
    count_below,
    discretize,
    eigen_decay,
    estimate_ids,
    ids_modulus,
    sample_restriction,
    shooting_singularity,
)
from .config import RunConfig, load_config, parse_config
from .seeding import derive_seed, stream
