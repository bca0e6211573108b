"""Quadratic lattice Hamiltonians and their Nambu (BdG) representation.

A quadratic Hamiltonian on ``N`` sites is stored through its coefficient
matrices::

    H = sum_ij Q_ij a_i^+ a_j + 1/2 (P_ij a_i^+ a_j^+ + P*_ij a_j a_i)

with ``Q`` Hermitian and ``P^T = -zeta P``. ``zeta = +1`` selects fermions and
``zeta = -1`` bosons.

Site indices are 0-based in the Python API. The JSON configuration format
(see :mod:`quadlind.config`) uses 1-based indices and converts on load.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import ConfigurationError, InstabilityError

__all__ = [
    "Statistics",
    "FERMION",
    "BOSON",
    "QuadraticHamiltonian",
    "ValidationReport",
    "NambuMatrices",
    "CouplingRegion",
    "validate",
    "build_bdg",
    "nambu_metric",
    "tight_binding_chain",
    "kitaev_chain",
    "harmonic_chain",
    "standard_model",
]

DEFAULT_VALIDATION_TOL = 1e-10


class Statistics(IntEnum):
    FERMION = 1
    BOSON = -1

    @classmethod
    def parse(cls, value) -> "Statistics":
        if isinstance(value, Statistics):
            return value
        if isinstance(value, str):
            key = value.strip().lower()
            if key in ("fermion", "fermions", "fermionic", "f"):
                return cls.FERMION
            if key in ("boson", "bosons", "bosonic", "b"):
                return cls.BOSON
            raise ConfigurationError(f"unknown statistics {value!r}")
        try:
            return cls(int(value))
        except (TypeError, ValueError):
            raise ConfigurationError(f"statistics must be +1 or -1, got {value!r}") from None


FERMION = Statistics.FERMION
BOSON = Statistics.BOSON


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """Coefficient matrices ``Q`` (normal) and ``P`` (anomalous) of a quadratic model."""

    Q: np.ndarray
    P: np.ndarray
    statistics: Statistics = FERMION

    def __post_init__(self):
        Q = _frozen(self.Q)
        P = _frozen(np.zeros_like(Q) if self.P is None else self.P)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ConfigurationError(f"Q must be a square matrix, got shape {Q.shape}")
        if P.shape != Q.shape:
            raise ConfigurationError(f"P has shape {P.shape}, expected {Q.shape}")
        if Q.shape[0] < 1:
            raise ConfigurationError("empty Hamiltonian")
        if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(P))):
            raise ConfigurationError("Q and P must be finite")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "statistics", Statistics.parse(self.statistics))

    @property
    def n_sites(self) -> int:
        return self.Q.shape[0]

    @property
    def zeta(self) -> int:
        return int(self.statistics)

    @property
    def is_normal(self) -> bool:
        """True when there are no pairing terms."""
        return not np.any(self.P)

    @property
    def is_real(self) -> bool:
        return not (np.any(self.Q.imag) or np.any(self.P.imag))


@dataclass(frozen=True)
class ValidationReport:
    q_violation: float
    p_violation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.q_violation <= self.tol and self.p_violation <= self.tol

    def __bool__(self) -> bool:
        return self.passed


def validate(h: QuadraticHamiltonian, tol: float | None = None) -> ValidationReport:
    """Check ``Q = Q^+`` and ``P^T + zeta P = 0``.

    Violations are max-modulus entrywise residuals. When ``tol`` is omitted
    it defaults to ``1e-10 * max(1, max|Q_ij|)``.
    """
    Q, P = h.Q, h.P
    if tol is None:
        tol = DEFAULT_VALIDATION_TOL * max(1.0, float(np.max(np.abs(Q))))
    q_violation = float(np.max(np.abs(Q - Q.conj().T)))
    p_violation = float(np.max(np.abs(P.T + h.zeta * P)))
    return ValidationReport(q_violation, p_violation, float(tol))


def require_valid(h: QuadraticHamiltonian, tol: float | None = None) -> None:
    report = validate(h, tol)
    if not report.passed:
        raise ConfigurationError(
            "invalid quadratic Hamiltonian: "
            f"|Q - Q^+|_max = {report.q_violation:.3g}, "
            f"|P^T + zeta P|_max = {report.p_violation:.3g} (tol {report.tol:.3g})"
        )


def nambu_metric(n: int, zeta: int) -> np.ndarray:
    """Diagonal of the Nambu metric diag(I, zeta I)."""
    return np.concatenate([np.ones(n), zeta * np.ones(n)])


@dataclass(frozen=True)
class NambuMatrices:
    H_bdg: np.ndarray
    D: np.ndarray
    metric: np.ndarray = field(repr=False)


def build_bdg(h: QuadraticHamiltonian) -> NambuMatrices:
    """Assemble the BdG matrix ``[[Q, P], [-zeta P*, -zeta Q*]]`` and ``D = I_zeta H``."""
    z = h.zeta
    H = np.block([[h.Q, h.P], [-z * h.P.conj(), -z * h.Q.conj()]])
    metric = nambu_metric(h.n_sites, z)
    return NambuMatrices(_frozen(H), _frozen(metric[:, None] * H), metric)


@dataclass(frozen=True)
class CouplingRegion:
    """Sites coupled to one bath, with complex weights (default 1)."""

    sites: tuple
    weights: np.ndarray = None

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        if len(set(sites)) != len(sites):
            raise ConfigurationError(f"coupling region has repeated sites: {sites}")
        if any(s < 0 for s in sites):
            raise ConfigurationError("site indices must be non-negative (0-based)")
        w = np.ones(len(sites)) if self.weights is None else self.weights
        w = _frozen(np.atleast_1d(w))
        if w.shape != (len(sites),):
            raise ConfigurationError(
                f"{len(sites)} sites but {w.shape[0] if w.ndim else 0} weights"
            )
        if not np.all(np.isfinite(w)):
            raise ConfigurationError("coupling weights must be finite")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "weights", w)

    def check_bounds(self, n_sites: int) -> None:
        if self.sites and max(self.sites) >= n_sites:
            raise ConfigurationError(
                f"coupling site {max(self.sites)} outside lattice of {n_sites} sites"
            )

    def weight_vector(self, n_sites: int) -> np.ndarray:
        """Dense length-``n_sites`` vector of weights (zero off the region)."""
        self.check_bounds(n_sites)
        w = np.zeros(n_sites, dtype=complex)
        w[list(self.sites)] = self.weights
        return w


def _chain_hopping(n: int, periodic: bool) -> np.ndarray:
    if n < 2:
        raise ConfigurationError("chains need at least 2 sites")
    if periodic and n < 3:
        raise ConfigurationError("periodic chains need at least 3 sites")
    K = np.zeros((n, n))
    idx = np.arange(n - 1)
    K[idx, idx + 1] = K[idx + 1, idx] = 1.0
    if periodic:
        K[0, n - 1] = K[n - 1, 0] = 1.0
    return K


def tight_binding_chain(
    N: int, J: float = 1.0, eps0: float = 0.0, statistics=FERMION, periodic: bool = False
) -> QuadraticHamiltonian:
    Q = eps0 * np.eye(N) - J * _chain_hopping(N, periodic)
    return QuadraticHamiltonian(Q, np.zeros((N, N)), Statistics.parse(statistics))


def kitaev_chain(
    N: int, J: float = 1.0, Delta: float = 1.0, mu0: float = 0.0, periodic: bool = False
) -> QuadraticHamiltonian:
    """Fermionic chain with hopping ``-J``, onsite ``-mu0`` and p-wave pairing ``P_{j,j+1} = Delta``."""
    Q = -mu0 * np.eye(N) - J * _chain_hopping(N, periodic)
    P = np.zeros((N, N))
    idx = np.arange(N - 1)
    P[idx, idx + 1] = Delta
    P[idx + 1, idx] = -Delta
    if periodic:
        P[N - 1, 0] = Delta
        P[0, N - 1] = -Delta
    return QuadraticHamiltonian(Q, P, FERMION)


def harmonic_chain(N: int, J: float = 1.0, eps0: float = 3.0, periodic: bool = False) -> QuadraticHamiltonian:
    """Bosonic tight-binding chain; stability requires ``eps0 > 2|J|``."""
    if not eps0 > 2 * abs(J):
        raise InstabilityError(
            f"harmonic chain needs eps0 > 2|J| for a positive-definite Hamiltonian "
            f"(got eps0={eps0}, J={J})"
        )
    return tight_binding_chain(N, J, eps0, BOSON, periodic)


_MODELS = {
    "tight_binding_chain": tight_binding_chain,
    "kitaev_chain": kitaev_chain,
    "harmonic_chain": harmonic_chain,
}


def standard_model(name: str, **params) -> QuadraticHamiltonian:
    """Build one of the named model families from keyword parameters."""
    try:
        builder = _MODELS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown model {name!r}; expected one of {sorted(_MODELS)}"
        ) from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for {name}: {exc}") from None
