"""The random operator family and its per-cell objects.

The model is a quasi one-dimensional Schroedinger operator acting on
vector-valued functions of one real variable: N coupled channels with a
fixed symmetric interaction matrix V and, on each cell [l n, l (n+1)) of
length ``ell``, an i.i.d. random diagonal potential diag(c_i omega_i).
At energy E the Cauchy data (u, u') propagates across one cell by the
transfer matrix

    T = exp(ell * X),    X = [[0, I], [M, 0]],    M = V + diag(c omega) - E I,

which is symplectic because X is Hamiltonian.  This module provides M, X,
T, the spectral constants (lambda_min, lambda_max, delta, ell_C), and the
certified energy window derived from them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InstabilityError, SizeGuardError
from .linalg import SpElement, as_symmetric, exp_matrix, is_symplectic, sym_eigenvalues

__all__ = [
    "DEFAULT_RHO",
    "DisorderSpec",
    "ModelParams",
    "SpectralBounds",
    "EnergyInterval",
    "cell_matrix",
    "generator",
    "transfer",
    "generator_norm",
    "spectral_bounds",
    "energy_interval",
    "sample_cell",
    "sample_path",
    "binary_cells",
]

# Largest radius for which the principal matrix logarithm of exp(ell*X) is
# guaranteed to be defined and equal to ell*X when ell*||X|| stays below it.
DEFAULT_RHO = math.log(2.0)

_BINARY_GUARD = 20


@dataclass(frozen=True)
class DisorderSpec:
    """Finite discrete law for the per-channel disorder variables.

    ``atoms`` is a tuple of (value, probability) pairs.  Degenerate
    single-atom laws are allowed at the library level (they are what the
    deterministic closed-form tests use); the configuration parser is the
    place that insists on {0, 1} being in the support.
    """

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        atoms = tuple((float(v), float(p)) for v, p in self.atoms)
        if not atoms:
            raise ValueError("disorder law needs at least one atom")
        values = [v for v, _ in atoms]
        probs = [p for _, p in atoms]
        if len(set(values)) != len(values):
            raise ValueError("disorder atoms must have distinct values")
        if any(not np.isfinite(v) for v in values):
            raise ValueError("disorder atom values must be finite")
        if any(p <= 0 for p in probs):
            raise ValueError("disorder probabilities must be positive")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError("disorder probabilities must sum to 1")
        object.__setattr__(self, "atoms", atoms)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.atoms])

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.atoms])

    @property
    def has_binary_support(self) -> bool:
        vals = {v for v, _ in self.atoms}
        return 0.0 in vals and 1.0 in vals

    @classmethod
    def bernoulli(cls, p: float = 0.5) -> "DisorderSpec":
        return cls(((0.0, 1.0 - p), (1.0, p)))

    @classmethod
    def point(cls, value: float) -> "DisorderSpec":
        """Degenerate law concentrated on one value."""
        return cls(((value, 1.0),))


@dataclass(frozen=True)
class ModelParams:
    """Immutable description of one operator family.

    ``v`` is the N x N symmetric interaction, ``c`` the per-channel
    coupling constants (all non-zero), ``ell`` the cell length and ``rho``
    the radius of the ball certified to lie inside the log of the density
    criterion's identity neighborhood.  ``rho`` defaults to log 2, the
    computable radius on which log(exp(ell X)) = ell X is guaranteed; it
    is configuration so users can tighten it.
    """

    n: int
    v: np.ndarray
    c: np.ndarray
    ell: float
    rho: float = DEFAULT_RHO
    disorder: DisorderSpec = field(default_factory=DisorderSpec.bernoulli)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        v = as_symmetric(np.asarray(self.v, dtype=float))
        if v.shape != (self.n, self.n):
            raise DimensionError(f"v must be {self.n}x{self.n}, got {v.shape}")
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        if c.shape != (self.n,):
            raise DimensionError(f"c must have length {self.n}, got {c.shape}")
        if not np.all(np.isfinite(c)) or np.any(c == 0.0):
            raise ValueError("all coupling constants c_i must be non-zero and finite")
        if not (np.isfinite(self.ell) and self.ell > 0):
            raise ValueError("ell must be positive and finite")
        if not (0 < self.rho <= 1):
            raise ValueError("rho must lie in (0, 1]")
        v.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "c", c)


@dataclass(frozen=True)
class SpectralBounds:
    """Extreme eigenvalues over the binary disorder family and derived constants."""

    lambda_min: float
    lambda_max: float
    delta: float
    ell_c: float


@dataclass(frozen=True)
class EnergyInterval:
    """Closed interval [lo, hi]; lo > hi encodes the empty interval."""

    lo: float
    hi: float

    @classmethod
    def empty(cls) -> "EnergyInterval":
        return cls(math.inf, -math.inf)

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi

    @property
    def length(self) -> float:
        return 0.0 if self.is_empty else self.hi - self.lo

    def contains(self, energy: float) -> bool:
        return not self.is_empty and self.lo <= energy <= self.hi

    def grid(self, count: int) -> np.ndarray:
        if self.is_empty:
            raise ValueError("cannot grid an empty interval")
        return np.linspace(self.lo, self.hi, count)


def _check_cell(params: ModelParams, omega: np.ndarray) -> np.ndarray:
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if omega.shape != (params.n,):
        raise DimensionError(f"cell configuration must have length {params.n}")
    return omega


def cell_matrix(params: ModelParams, omega: np.ndarray, energy: float) -> np.ndarray:
    """Single-cell channel matrix V + diag(c_i omega_i) - E I, symmetric."""
    omega = _check_cell(params, omega)
    return params.v + np.diag(params.c * omega) - energy * np.eye(params.n)


def generator(params: ModelParams, omega: np.ndarray, energy: float) -> SpElement:
    """Hamiltonian generator [[0, I], [M, 0]] of the cell's transfer matrix."""
    n = params.n
    return SpElement(np.zeros((n, n)), np.eye(n), cell_matrix(params, omega, energy))


def transfer(params: ModelParams, omega: np.ndarray, energy: float) -> np.ndarray:
    """Transfer matrix exp(ell * X) across one disorder cell."""
    t = exp_matrix(generator(params, omega, energy).matrix, params.ell)
    if not is_symplectic(t, 1e-12 * np.linalg.norm(t) ** 2):
        raise InstabilityError("transfer matrix failed the symplecticity check")
    return t


def generator_norm(params: ModelParams, omega: np.ndarray, energy: float) -> float:
    """Induced 2-norm of the generator via its closed form.

    The eigenvalues of t(X) X are 1 and (lambda_i - E)^2 where lambda_i
    are the eigenvalues of the cell matrix at energy zero, so the norm is
    max(1, max_i |lambda_i - E|).
    """
    lams = sym_eigenvalues(cell_matrix(params, omega, 0.0))
    return max(1.0, float(np.max(np.abs(lams - energy))))


def spectral_bounds(params: ModelParams) -> SpectralBounds:
    """Eigenvalue extremes over all binary cells and the critical cell length.

    ``ell_c = min(1, rho / delta)`` with the convention ell_c = 1 when
    delta = 0 (all binary cells sharing one eigenvalue set).
    """
    lo = math.inf
    hi = -math.inf
    for omega in binary_cells(params.n):
        lams = sym_eigenvalues(cell_matrix(params, omega, 0.0))
        lo = min(lo, float(lams[0]))
        hi = max(hi, float(lams[-1]))
    delta = 0.5 * (hi - lo)
    ell_c = 1.0 if delta == 0.0 else min(1.0, params.rho / delta)
    return SpectralBounds(lo, hi, delta, ell_c)


def energy_interval(params: ModelParams) -> EnergyInterval:
    """Certified energy window [lambda_max - rho/ell, lambda_min + rho/ell].

    Nonempty exactly when ell < ell_c; its length 2(rho/ell - delta) grows
    without bound as ell tends to 0.
    """
    bounds = spectral_bounds(params)
    if params.ell >= bounds.ell_c:
        return EnergyInterval.empty()
    r = params.rho / params.ell
    return EnergyInterval(bounds.lambda_max - r, bounds.lambda_min + r)


def sample_cell(params: ModelParams, rng: np.random.Generator) -> np.ndarray:
    """One cell configuration: N independent draws from the disorder law."""
    values = params.disorder.values
    idx = rng.choice(len(values), size=params.n, p=params.disorder.probabilities)
    return values[idx]


def sample_path(params: ModelParams, n_cells: int, rng: np.random.Generator) -> np.ndarray:
    """Stack of ``n_cells`` independent cell configurations, shape (n_cells, N)."""
    values = params.disorder.values
    idx = rng.choice(len(values), size=(n_cells, params.n), p=params.disorder.probabilities)
    return values[idx]


def binary_cells(n: int) -> np.ndarray:
    """All 2^n cell configurations over {0, 1}, lexicographic, shape (2^n, n)."""
    if n < 1:
        raise ValueError("n must be positive")
    if n > _BINARY_GUARD:
        raise SizeGuardError(f"2^{n} binary cells exceed the guard (n <= {_BINARY_GUARD})")
    return np.array(list(itertools.product((0.0, 1.0), repeat=n)))
