"""Closed-form two-point dynamics in the normal-mode basis.

States are Gaussian and are carried by their quasiparticle correlators

    theta[k, q] = <b_k^+ b_q>,      kappa[k, q] = <b_k b_q>.

Under the secular master equation every entry evolves independently: the
occupations relax to the rate-weighted bath average at rate
``2 sum_n gamma_{n,k}``, the coherences decay at ``sum_n (gamma_{n,k} +
gamma_{n,q})`` while rotating with the Lamb-shifted frequencies. A fermionic
zero mode couples ``<b_0^+ b_q>`` and ``<b_0 b_q>``; in a real gauge their
sum decays at ``4 Delta`` and their difference is only affected by mode ``q``.

Real-space correlations follow from ``a = A b + B b^+``. In Nambu form, with
``G_b = [[theta, kappa^+], [kappa, 1 - zeta theta^T]]``, the matrix of
``<alpha_i^+ alpha_j>`` for ``alpha = (a, a^+)`` is ``T* G_b T^T``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .bogoliubov import BogoliubovDecomposition
from .errors import CapabilityError, ConfigurationError
from .lindblad_builder import EffectiveModel

__all__ = [
    "PartialSteadyStateWarning",
    "QuasiparticleState",
    "CorrelationSet",
    "evolve_two_point",
    "steady_theta",
    "real_space_correlations",
    "quasiparticle_correlations",
    "density_density",
]


class PartialSteadyStateWarning(UserWarning):
    """Some modes are not coupled to any bath and keep their initial data."""


def _as_matrix(x, n, name):
    m = np.array(x, dtype=complex)
    if m.shape != (n, n):
        raise ConfigurationError(f"{name} must be {n}x{n}, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class QuasiparticleState:
    theta: np.ndarray
    kappa: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        n = np.shape(self.theta)[0]
        object.__setattr__(self, "theta", _as_matrix(self.theta, n, "theta"))
        k = np.zeros((n, n)) if self.kappa is None else self.kappa
        object.__setattr__(self, "kappa", _as_matrix(k, n, "kappa"))

    @property
    def n_modes(self) -> int:
        return self.theta.shape[0]

    @property
    def occupations(self) -> np.ndarray:
        return self.theta.diagonal().real.copy()

    @classmethod
    def vacuum(cls, n: int) -> "QuasiparticleState":
        return cls(np.zeros((n, n)), np.zeros((n, n)))

    @classmethod
    def diagonal(cls, occupations) -> "QuasiparticleState":
        occ = np.asarray(occupations, dtype=float)
        return cls(np.diag(occ), np.zeros((occ.size, occ.size)))

    @classmethod
    def thermal(cls, dec: BogoliubovDecomposition, T: float, mu: float) -> "QuasiparticleState":
        """Grand-canonical quasiparticle occupations ``f(omega_k)``."""
        from .environment import distribution

        return cls.diagonal(distribution(dec.omegas, T, mu, dec.zeta))

    @classmethod
    def from_real_space(cls, dec: BogoliubovDecomposition, corr: "CorrelationSet") -> "QuasiparticleState":
        return quasiparticle_correlations(dec, corr)

    def check(self, zeta: int, tol: float = 1e-10) -> None:
        """Raise ``ValueError`` if the state violates Hermiticity, (anti)symmetry
        or the occupation bounds (``0 <= theta``, and ``theta <= 1`` for fermions)."""
        herm = np.max(np.abs(self.theta - self.theta.conj().T), initial=0.0)
        sym = np.max(np.abs(self.kappa.T + zeta * self.kappa), initial=0.0)
        if herm > tol or sym > tol:
            raise ValueError(f"unphysical quasiparticle state: |theta - theta^+| = {herm:.3g}, "
                             f"|kappa^T + zeta kappa| = {sym:.3g}")
        if self.n_modes:
            occ = np.linalg.eigvalsh(0.5 * (self.theta + self.theta.conj().T))
            if occ[0] < -tol or (zeta == 1 and occ[-1] > 1 + tol):
                raise ValueError(f"unphysical quasiparticle state: theta eigenvalues span "
                                 f"[{occ[0]:.3g}, {occ[-1]:.3g}]")


@dataclass(frozen=True)
class CorrelationSet:
    C: np.ndarray
    """``C[i, j] = <a_i^+ a_j>``."""
    F: np.ndarray
    """``F[i, j] = <a_i^+ a_j^+>``."""
    zeta: int = 1

    @property
    def densities(self) -> np.ndarray:
        return self.C.diagonal().real.copy()


def _mode_rates(model: EffectiveModel):
    gamma = model.gamma
    rates = gamma.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        target = np.where(rates > 0, (gamma * model.f_at_modes).sum(axis=0) / rates, np.nan)
    return rates, target


def evolve_two_point(model: EffectiveModel, initial: QuasiparticleState, t: float) -> QuasiparticleState:
    """Propagate ``initial`` by a time ``t >= 0`` with the closed-form solution.

    Raises
    ------
    CapabilityError
        For degenerate spectra and zero modes without a real gauge.
    """
    model.require_closed_form()
    if not t >= 0:
        raise ConfigurationError(f"evolution time must be >= 0, got {t}")
    n = model.n_modes
    if initial.n_modes != n:
        raise ConfigurationError(f"state has {initial.n_modes} modes, model has {n}")
    rates, target = _mode_rates(model)
    w = model.omega_tilde.copy()
    zero = model.zero_mode
    if zero is not None:
        w[zero.index] = 0.0

    # per-mode complex decay factors: b_k^+ -> exp((i w_k - r_k) t)
    up = np.exp((1j * w - rates) * t)
    theta = initial.theta * np.outer(up, up.conj())
    kappa = initial.kappa * np.outer(up.conj(), up.conj())
    relax = np.exp(-2.0 * rates * t)
    diag = initial.theta.diagonal().real
    pos = rates > 0
    diag_t = diag.copy()
    diag_t[pos] = (diag[pos] - target[pos]) * relax[pos] + target[pos]
    np.fill_diagonal(theta, diag_t)

    if zero is not None:
        z = zero.index
        e = np.exp(-4.0 * zero.Delta * t)
        others = np.arange(n) != z
        u0 = initial.theta[z, others]
        v0 = initial.kappa[z, others]
        s = up[others].conj()
        u = s * 0.5 * ((e + 1) * u0 + (e - 1) * v0)
        v = s * 0.5 * ((e - 1) * u0 + (e + 1) * v0)
        theta[z, others] = u
        theta[others, z] = u.conj()
        kappa[z, others] = v
        kappa[others, z] = -v
        kappa[z, z] = 0.0
        theta[z, z] = (diag[z] - 0.5) * e + 0.5
    return QuasiparticleState(theta, kappa, initial.time + float(t))


def steady_theta(model: EffectiveModel, initial: QuasiparticleState | None = None) -> QuasiparticleState:
    """Stationary quasiparticle correlations.

    ``theta`` is diagonal with ``sum_n gamma_{n,k} f_n / sum_n gamma_{n,k}``
    and ``kappa = 0``; a coupled fermionic zero mode sits at 1/2. Modes with
    no coupling at all keep the occupations of ``initial`` or are set to NaN
    when no initial state is given; a :class:`PartialSteadyStateWarning`
    names them.

    Degenerate spectra are only accepted when all baths share one
    temperature and chemical potential, where the Gibbs state is stationary.
    """
    equilibrium = len({(b.temperature, b.mu) for b in model.baths}) == 1
    if not (model.closed_form_available or (equilibrium and model.zero_mode is None)):
        model.require_closed_form()
    n = model.n_modes
    rates, target = _mode_rates(model)
    occ = target.copy()
    if model.is_degenerate:
        occ = model.f_at_modes[0].copy()
    zero = model.zero_mode
    if zero is not None and zero.Delta > 0:
        occ[zero.index] = 0.5
    frozen = [k for k in range(n) if np.isnan(occ[k])]
    if frozen:
        if initial is not None:
            occ[frozen] = initial.theta.diagonal().real[frozen]
        warnings.warn(
            f"modes {frozen} are decoupled from every bath; the steady state is not unique "
            "and their occupations are " + ("kept from the initial state" if initial is not None else "undefined (NaN)"),
            PartialSteadyStateWarning,
            stacklevel=2,
        )
    return QuasiparticleState(np.diag(occ), np.zeros((n, n)), np.inf)


def _nambu_state(state: QuasiparticleState, zeta: int) -> np.ndarray:
    th, ka = state.theta, state.kappa
    n = th.shape[0]
    return np.block([[th, ka.conj().T], [ka, np.eye(n) - zeta * th.T]])


def real_space_correlations(dec: BogoliubovDecomposition, state: QuasiparticleState) -> CorrelationSet:
    """``C = <a^+ a>`` and ``F = <a^+ a^+>`` from quasiparticle correlators.

    For ``kappa = 0`` and symmetric ``theta`` this is
    ``C = A* theta A^T - zeta B* theta B^T + B* B^T`` and
    ``F = A* theta B^+ - zeta B* theta A^+ + B* A^+``.
    """
    A, B, z = dec.A, dec.B, dec.zeta
    th, ka = state.theta, state.kappa
    rest = np.eye(th.shape[0]) - z * th.T
    Ac, Bc = A.conj(), B.conj()
    C = Ac @ th @ A.T + Bc @ rest @ B.T
    F = Ac @ th @ B.conj().T + Bc @ rest @ A.conj().T
    if np.any(ka):
        C += Ac @ ka.conj().T @ B.T + Bc @ ka @ A.T
        F += Ac @ ka.conj().T @ A.conj().T + Bc @ ka @ B.conj().T
    return CorrelationSet(C, F, z)


def quasiparticle_correlations(dec: BogoliubovDecomposition, corr: CorrelationSet) -> QuasiparticleState:
    """Inverse of :func:`real_space_correlations`, using ``T^-1 = I T^+ I``."""
    z = dec.zeta
    C, F = corr.C, corr.F
    n = C.shape[0]
    Ga = np.block([[C, F], [F.conj().T, np.eye(n) - z * C.T]])
    metric = np.concatenate([np.ones(n), z * np.ones(n)])
    Tinv = metric[:, None] * dec.T.conj().T * metric[None, :]
    Gb = Tinv.conj() @ Ga @ Tinv.T
    return QuasiparticleState(Gb[:n, :n], Gb[n:, :n])


def density_density(corr: CorrelationSet) -> np.ndarray:
    """Connected density correlations ``<n_i n_j> - <n_i><n_j>`` of a Gaussian state.

    Wick's theorem gives
    ``G_ij = -zeta (F_ij F*_ji + C_ij C_ji) + delta_ij C_ii``.
    For fermions ``F_ij F*_ji = -|F_ij|^2``, so pairing raises the covariance.
    """
    C, F, z = corr.C, corr.F, corr.zeta
    G = -z * (F * F.T.conj() + C * C.T)
    G[np.diag_indices_from(G)] += C.diagonal()
    return G.real
