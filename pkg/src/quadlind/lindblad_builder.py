"""Effective master-equation data for a quadratic system coupled to thermal baths.

For a non-degenerate spectrum without zero modes the dissipator is diagonal
in the normal modes ``b_k`` with rates

    gamma_{n,k} = J_n(omega_k) * |sum_p w_{p,n} phi_{pk}|^2

and each mode relaxes towards the rate-weighted average of the bath
occupations. Zero modes and degenerate classes are represented by the extra
objects :class:`ZeroModeData` and :class:`DegeneracyData`; the closed-form
solvers only accept models for which :attr:`EffectiveModel.closed_form_available`
holds, everything else goes to :mod:`quadlind.oracle`.

Eigenoperators are never built as Fock-space matrices here, only as
coefficient vectors over ``{b_k, b_k^+}``.
"""
from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .bogoliubov import BogoliubovDecomposition, SpectrumClassification, classify_spectrum, diagonalize
from .environment import Bath, lamb_kernel, lamb_shift, occupation
from .errors import CapabilityError, ConfigurationError, DivergenceError
from .quadratic_model import CouplingRegion, QuadraticHamiltonian

__all__ = [
    "QuasiDegeneracyWarning",
    "EigenoperatorTerm",
    "ZeroModeData",
    "DegeneracyData",
    "EffectiveModel",
    "coupling_amplitudes",
    "coupling_weights",
    "effective_couplings",
    "eigenoperator_coefficients",
    "build_effective_model",
    "degeneracy_data",
    "local_rates",
]

# classes closer than this multiple of the largest relaxation rate are flagged
SECULAR_MARGIN = 10.0


class QuasiDegeneracyWarning(UserWarning):
    pass


def coupling_amplitudes(dec: BogoliubovDecomposition, region: CouplingRegion) -> np.ndarray:
    """``c_k = sum_p w_p phi_{pk}`` for every normal mode."""
    return region.weight_vector(dec.n_modes) @ dec.phi


def coupling_weights(dec: BogoliubovDecomposition, region: CouplingRegion) -> np.ndarray:
    """``Phi_k = |sum_p w_p phi_{pk}|^2``."""
    return np.abs(coupling_amplitudes(dec, region)) ** 2


def _check_bose_mu(dec, baths):
    if dec.zeta != -1:
        return
    wmin = float(np.min(dec.omegas))
    for n, bath in enumerate(baths):
        if bath.mu >= wmin:
            raise DivergenceError(
                f"bath {n}: bosonic chemical potential {bath.mu} must lie below the "
                f"lowest mode energy {wmin:.6g}"
            )


def effective_couplings(dec: BogoliubovDecomposition, baths) -> np.ndarray:
    """Rates ``gamma_{n,k} = J_n(omega_k) Phi_{n,k}``, shape ``(n_baths, n_modes)``."""
    _check_bose_mu(dec, baths)
    gamma = np.empty((len(baths), dec.n_modes))
    for n, bath in enumerate(baths):
        gamma[n] = bath.J(dec.omegas) * coupling_weights(dec, bath.region)
    return gamma


class EigenoperatorTerm(NamedTuple):
    mode: int
    dagger: bool
    coefficient: complex


def eigenoperator_coefficients(
    dec: BogoliubovDecomposition,
    region: CouplingRegion,
    omega: float,
    cluster_tol: float | None = None,
) -> list:
    """Terms of the bath eigenoperator at Bohr frequency ``omega``.

    ``c_k b_k`` for every mode with ``omega_k = omega`` and ``c_k^* b_k^+``
    for every mode with ``omega_k = -omega``; empty if ``omega`` is not in
    the spectrum.
    """
    tol = dec.tolerances[1] if cluster_tol is None else cluster_tol
    c = coupling_amplitudes(dec, region)
    terms = []
    for k, wk in enumerate(dec.omegas):
        if abs(omega - wk) <= tol:
            terms.append(EigenoperatorTerm(k, False, complex(c[k])))
        if abs(omega + wk) <= tol:
            terms.append(EigenoperatorTerm(k, True, complex(np.conj(c[k]))))
    return terms


@dataclass(frozen=True)
class ZeroModeData:
    index: int
    Delta: float
    Psi: np.ndarray
    Phi: np.ndarray
    closed_form: bool
    """True when ``Psi_{n,0} = Phi_{n,0}`` for every bath (real gauge), the
    condition under which the single ``b_0 + b_0^+`` dissipator applies."""


@dataclass(frozen=True)
class DegeneracyData:
    phi_blocks: dict
    """``(bath, class) -> Phi^(n, lambda)``, Hermitian rank-one matrices on the class."""
    psi_blocks: dict
    """``bath -> Psi^(n, 0)`` on the zero-energy class (empty without zero modes)."""
    lamb_blocks: dict
    """``class -> phi_uv`` matrix Lamb shift."""
    rotations: dict
    """``(bath, class) -> (eigenvalues, U)`` with ``U^+ Phi U`` diagonal."""


@dataclass(frozen=True)
class EffectiveModel:
    hamiltonian: QuadraticHamiltonian
    decomposition: BogoliubovDecomposition
    baths: tuple
    amplitudes: np.ndarray
    Phi: np.ndarray
    gamma: np.ndarray
    f_at_modes: np.ndarray
    lamb: np.ndarray
    omega_tilde: np.ndarray
    classification: SpectrumClassification
    zero_mode: ZeroModeData | None = None
    degeneracy: DegeneracyData | None = None
    notes: tuple = field(default=())
    zero_tol: float = 0.0
    cluster_tol: float = 0.0

    @property
    def zeta(self) -> int:
        return self.decomposition.zeta

    @property
    def n_modes(self) -> int:
        return self.decomposition.n_modes

    @property
    def n_baths(self) -> int:
        return len(self.baths)

    @property
    def omegas(self) -> np.ndarray:
        return self.decomposition.omegas

    @property
    def total_rates(self) -> np.ndarray:
        return self.gamma.sum(axis=0)

    @property
    def non_relaxing_modes(self) -> tuple:
        zero = set(self.classification.zero_modes) if self.zero_mode is not None else set()
        rates = self.total_rates
        return tuple(k for k in range(self.n_modes) if rates[k] == 0.0 and k not in zero)

    @property
    def is_degenerate(self) -> bool:
        return self.classification.is_degenerate

    @property
    def closed_form_available(self) -> bool:
        if self.is_degenerate:
            return False
        return self.zero_mode is None or self.zero_mode.closed_form

    def require_closed_form(self) -> None:
        if self.is_degenerate:
            sizes = [len(c) for c in self.classification.classes if len(c) > 1]
            raise CapabilityError(
                f"spectrum has degenerate classes of sizes {sizes}; no closed-form solution "
                "exists, use quadlind.oracle"
            )
        if self.zero_mode is not None and not self.zero_mode.closed_form:
            raise CapabilityError(
                "zero mode with Psi != Phi (complex Hamiltonian or weights); the closed-form "
                "zero-mode solution needs a real setting, use quadlind.oracle"
            )

    def with_bath_parameters(self, temperatures=None, mus=None) -> "EffectiveModel":
        """Copy with new bath temperatures / chemical potentials.

        Rates and Lamb shifts depend only on the spectral densities, so only
        the cached occupations are recomputed.
        """
        temps = [b.temperature for b in self.baths] if temperatures is None else temperatures
        mus = [b.mu for b in self.baths] if mus is None else mus
        baths = tuple(
            dataclasses.replace(b, temperature=float(T), mu=float(m))
            for b, T, m in zip(self.baths, temps, mus)
        )
        _check_bose_mu(self.decomposition, baths)
        f = np.array([occupation(b, self.zeta, self.omegas) for b in baths]).reshape(len(baths), -1)
        return dataclasses.replace(self, baths=baths, f_at_modes=f)


def degeneracy_data(dec, baths, amplitudes, classification) -> DegeneracyData:
    """Per-class coupling blocks ``Phi^(n, lambda) = c c^+`` with their eigendecompositions.

    Computed for every class, including the trivial one-member ones.
    """
    phi_blocks, psi_blocks, lamb_blocks, rotations = {}, {}, {}, {}
    zero_class = 0 if classification.has_zero_mode else None
    for lam, members in enumerate(classification.classes):
        idx = list(members)
        energy = classification.class_energies[lam]
        lamb = np.zeros((len(idx), len(idx)), dtype=complex)
        for n, bath in enumerate(baths):
            c = amplitudes[n, idx]
            block = np.outer(c, c.conj())
            phi_blocks[n, lam] = block
            rotations[n, lam] = np.linalg.eigh(block)
            if lam == zero_class:
                psi_blocks[n] = np.outer(c, c)
            elif energy > 0:
                lamb += block.T * lamb_kernel(bath.spectral_density, dec.zeta, energy)
        lamb_blocks[lam] = lamb
    return DegeneracyData(phi_blocks, psi_blocks, lamb_blocks, rotations)


def build_effective_model(
    h: QuadraticHamiltonian,
    baths,
    zero_tol: float | None = None,
    cluster_tol: float | None = None,
    decomposition: BogoliubovDecomposition | None = None,
    validation_tol: float | None = None,
) -> EffectiveModel:
    """Diagonalize ``h`` and assemble rates, occupations and Lamb shifts.

    Parameters
    ----------
    h : QuadraticHamiltonian
    baths : sequence of Bath
    zero_tol, cluster_tol : float, optional
        Zero-mode and degeneracy tolerances, see
        :func:`quadlind.bogoliubov.default_tolerances`.
    decomposition : BogoliubovDecomposition, optional
        Reuse an existing diagonalization of ``h`` (e.g. a different gauge).
    validation_tol : float, optional
        Tolerance of the Hermiticity and (anti)symmetry check on ``h``.
    """
    baths = tuple(baths)
    if not baths:
        raise ConfigurationError("at least one bath is required")
    for bath in baths:
        if not isinstance(bath, Bath):
            raise ConfigurationError(f"expected Bath, got {type(bath).__name__}")
        bath.region.check_bounds(h.n_sites)
    dec = diagonalize(h, zero_tol, validation_tol) if decomposition is None else decomposition
    dz, dc = dec.tolerances
    zero_tol = dz if zero_tol is None else zero_tol
    cluster_tol = dc if cluster_tol is None else cluster_tol
    cls = classify_spectrum(dec, zero_tol, cluster_tol)

    amplitudes = np.array([coupling_amplitudes(dec, b.region) for b in baths])
    Phi = np.abs(amplitudes) ** 2
    gamma = effective_couplings(dec, baths)
    f = np.array([occupation(b, dec.zeta, dec.omegas) for b in baths]).reshape(len(baths), -1)
    lamb = lamb_shift(baths, dec.zeta, Phi, dec.omegas)
    # the zero-mode jump operator X = b0 + b0^+ squares to one, so its Lamb term is a constant
    lamb[list(cls.zero_modes)] = 0.0
    notes = []
    if cls.has_zero_mode:
        notes.append("zero-mode Lamb shift set to 0: its Lamb term is proportional to the identity")

    zero_mode = None
    if cls.has_zero_mode:
        k0 = cls.zero_modes[0]
        psi = amplitudes[:, k0] ** 2
        tol = 1e-10 * max(1.0, float(np.max(Phi[:, k0])))
        real_gauge = len(cls.zero_modes) == 1 and bool(np.all(np.abs(psi - Phi[:, k0]) <= tol))
        zero_mode = ZeroModeData(k0, float(gamma[:, k0].sum()), psi, Phi[:, k0].copy(), real_gauge)
        if not real_gauge:
            notes.append("zero mode without a real gauge: closed-form dynamics disabled")

    degeneracy = None
    if cls.is_degenerate:
        degeneracy = degeneracy_data(dec, baths, amplitudes, cls)
        notes.append("degenerate spectrum: closed-form dynamics disabled")

    rate_scale = float(np.max(gamma.sum(axis=0))) if gamma.size else 0.0
    if rate_scale > 0 and cls.smallest_gap < SECULAR_MARGIN * rate_scale:
        msg = (
            f"smallest gap between distinct levels {cls.smallest_gap:.3g} is not large "
            f"compared with the relaxation rates (max {rate_scale:.3g}); the secular "
            "approximation may be unreliable"
        )
        warnings.warn(msg, QuasiDegeneracyWarning, stacklevel=2)
        notes.append(msg)

    return EffectiveModel(
        hamiltonian=h,
        decomposition=dec,
        baths=baths,
        amplitudes=amplitudes,
        Phi=Phi,
        gamma=gamma,
        f_at_modes=f,
        lamb=lamb,
        omega_tilde=dec.omegas + lamb,
        classification=cls,
        zero_mode=zero_mode,
        degeneracy=degeneracy,
        notes=tuple(notes),
        zero_tol=float(zero_tol),
        cluster_tol=float(cluster_tol),
    )


def local_rates(baths, Omega: float, zeta: int, n_sites: int) -> tuple[np.ndarray, np.ndarray]:
    """Pump and loss rates of the phenomenological local dissipator.

    Every site ``p`` in the region of bath ``n`` receives
    ``J_n(Omega) f_n(Omega)`` (pump) and ``J_n(Omega)[1 - zeta f_n(Omega)]``
    (loss), summed over baths.
    """
    if not Omega > 0:
        raise ConfigurationError("the local dissipator needs a positive reference frequency")
    up = np.zeros(n_sites)
    down = np.zeros(n_sites)
    for bath in baths:
        bath.region.check_bounds(n_sites)
        J = float(bath.J(Omega))
        f = float(occupation(bath, zeta, Omega))
        sites = list(bath.region.sites)
        up[sites] += J * f
        down[sites] += J * (1.0 - zeta * f)
    return up, down
