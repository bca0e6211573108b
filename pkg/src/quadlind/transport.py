"""Steady-state currents between two baths and thermoelectric linear response.

Bath 0 is the left reservoir and bath 1 the right one; positive currents
flow from the left bath into the system. A mode carries current only if it
couples to both baths; its transfer factor is the harmonic mean
``tau_k = 2 gamma_L gamma_R / (gamma_L + gamma_R)``. A fermionic zero mode is
left out: its own dissipator has no net effect on any of the currents.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bogoliubov import BogoliubovDecomposition
from .environment import distribution
from .errors import ConfigurationError, DivergenceError
from .lindblad_builder import EffectiveModel

__all__ = [
    "TransportReport",
    "LinearResponsePoint",
    "OnsagerResult",
    "anomaly_factors",
    "transfer_factors",
    "particle_current",
    "quasiparticle_current",
    "energy_current",
    "heat_current",
    "bath_fluxes",
    "onsager_matrix",
    "onsager_finite_difference",
    "transport_report",
]


def anomaly_factors(dec: BogoliubovDecomposition) -> np.ndarray:
    """``S_k = (A^+ A - zeta B^+ B)_kk``."""
    S = np.sum(np.abs(dec.A) ** 2, axis=0) - dec.zeta * np.sum(np.abs(dec.B) ** 2, axis=0)
    return S


def _two_baths(model: EffectiveModel) -> None:
    if model.n_baths != 2:
        raise ConfigurationError(f"transport needs exactly 2 baths, model has {model.n_baths}")
    model.require_closed_form()


def _conducting(model: EffectiveModel) -> np.ndarray:
    gL, gR = model.gamma
    mask = (gL > 0) & (gR > 0)
    if model.zero_mode is not None:
        mask[model.zero_mode.index] = False
    return mask


def transfer_factors(model: EffectiveModel) -> np.ndarray:
    """Harmonic-mean transfer factors; zero outside the conducting set."""
    _two_baths(model)
    gL, gR = model.gamma
    mask = _conducting(model)
    tau = np.zeros(model.n_modes)
    tau[mask] = 2.0 * gL[mask] * gR[mask] / (gL[mask] + gR[mask])
    return tau


def _bias(model: EffectiveModel) -> np.ndarray:
    fL, fR = model.f_at_modes
    return fL - fR


def particle_current(model: EffectiveModel, breakdown: bool = False):
    """``J_N = sum' S_k tau_k [f_L(omega_k) - f_R(omega_k)]``."""
    terms = anomaly_factors(model.decomposition) * transfer_factors(model) * _bias(model)
    return (float(np.sum(terms)), terms) if breakdown else float(np.sum(terms))


def quasiparticle_current(model: EffectiveModel, breakdown: bool = False):
    terms = transfer_factors(model) * _bias(model)
    return (float(np.sum(terms)), terms) if breakdown else float(np.sum(terms))


def energy_current(model: EffectiveModel, breakdown: bool = False):
    """Energy current weighted by the bare mode energies."""
    terms = model.omegas * transfer_factors(model) * _bias(model)
    return (float(np.sum(terms)), terms) if breakdown else float(np.sum(terms))


def heat_current(model: EffectiveModel, mu: float) -> float:
    return energy_current(model) - mu * quasiparticle_current(model)


def bath_fluxes(model: EffectiveModel, bath: int) -> dict:
    """Currents injected by one bath, evaluated from its own relaxation term.

    Uses the steady occupations ``n_k`` and ``-2 gamma_{n,k} (n_k - f_n)``
    per mode, so the left and right values are computed independently of
    the transfer-factor formulas.
    """
    _two_baths(model)
    mask = _conducting(model)
    g = model.gamma[bath]
    rates = model.gamma.sum(axis=0)
    occ = np.zeros(model.n_modes)
    occ[mask] = (model.gamma[:, mask] * model.f_at_modes[:, mask]).sum(axis=0) / rates[mask]
    inflow = np.where(mask, -2.0 * g * (occ - model.f_at_modes[bath]), 0.0)
    S = anomaly_factors(model.decomposition)
    return {
        "J_N": float(np.sum(S * inflow)),
        "J_NQ": float(np.sum(inflow)),
        "J_E": float(np.sum(model.omegas * inflow)),
    }


@dataclass(frozen=True)
class LinearResponsePoint:
    mu: float
    T: float
    dmu: float = 1e-4
    dT: float = 1e-4

    def __post_init__(self):
        if not (self.T - abs(self.dT) / 2 > 0):
            raise ConfigurationError("linear-response point needs T - dT/2 > 0")


@dataclass(frozen=True)
class OnsagerResult:
    L: np.ndarray
    asymmetry: float


def _dfdmu(omega, T, mu, zeta):
    x = (omega - mu) / T
    # e^x / (T (zeta + e^x)^2), written to stay finite for large |x|
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, e / (T * (zeta * e + 1.0) ** 2), e / (T * (zeta + e) ** 2))


def _dfdT(omega, T, mu, zeta):
    x = (omega - mu) / T
    e = np.exp(-np.abs(x))
    dfdx = np.where(x >= 0, e / (zeta * e + 1.0) ** 2, e / (zeta + e) ** 2)
    return dfdx * (omega - mu) / T**2


def _reference_check(model, T, mu):
    if not T > 0:
        raise ConfigurationError(f"temperature must be > 0, got {T}")
    if model.zeta == -1 and mu >= float(np.min(model.omegas)):
        raise DivergenceError(f"bosonic chemical potential {mu} must lie below min omega")


def onsager_matrix(model: EffectiveModel, point: LinearResponsePoint) -> OnsagerResult:
    """Onsager coefficients from analytic derivatives of the occupations.

    ``l11 = T dF_N/dmu``, ``l12 = T^2 dF_N/dT``,
    ``l21 = T (dF_E/dmu - mu dF_N/dmu)``, ``l22 = T^2 (dF_E/dT - mu dF_N/dT)``
    with ``F_N = sum' tau_k f(omega_k)`` and ``F_E = sum' tau_k omega_k f(omega_k)``.
    """
    T, mu = point.T, point.mu
    _reference_check(model, T, mu)
    tau = transfer_factors(model)
    w = model.omegas
    dmu = tau * _dfdmu(w, T, mu, model.zeta)
    dT = tau * _dfdT(w, T, mu, model.zeta)
    L = np.array(
        [
            [T * dmu.sum(), T**2 * dT.sum()],
            [T * ((w * dmu).sum() - mu * dmu.sum()), T**2 * ((w * dT).sum() - mu * dT.sum())],
        ]
    )
    scale = float(np.max(np.abs(L)))
    asym = abs(L[0, 1] - L[1, 0]) / scale if scale > 0 else 0.0
    return OnsagerResult(L, asym)


def onsager_finite_difference(model: EffectiveModel, point: LinearResponsePoint) -> np.ndarray:
    """Onsager matrix from currents at small symmetric imbalances.

    The left and right baths sit at ``mu +- dmu/2`` (resp. ``T +- dT/2``);
    ``J_NQ = l11 dmu/T + l12 dT/T^2`` and ``J_Q = l21 dmu/T + l22 dT/T^2``.
    """
    T, mu, dm, dt = point.T, point.mu, point.dmu, point.dT
    _reference_check(model, T, mu)
    if dm == 0 or dt == 0:
        raise ConfigurationError("finite-difference steps must be nonzero")

    def currents(TL, TR, muL, muR):
        m = model.with_bath_parameters([TL, TR], [muL, muR])
        return quasiparticle_current(m), heat_current(m, mu)

    jn_mu, jq_mu = currents(T, T, mu + dm / 2, mu - dm / 2)
    jn_T, jq_T = currents(T + dt / 2, T - dt / 2, mu, mu)
    return np.array([[T * jn_mu / dm, T**2 * jn_T / dt], [T * jq_mu / dm, T**2 * jq_T / dt]])


@dataclass(frozen=True)
class TransportReport:
    S: np.ndarray
    J_N: float
    J_NQ: float
    J_E: float
    J_Q: float
    mu_reference: float
    onsager: np.ndarray
    asymmetry: float
    channel_breakdown: dict = field(repr=False)
    right_fluxes: dict = field(default_factory=dict)
    excluded_modes: tuple = ()

    def as_dict(self) -> dict:
        return {
            "S": self.S.tolist(),
            "J_N": self.J_N,
            "J_NQ": self.J_NQ,
            "J_E": self.J_E,
            "J_Q": self.J_Q,
            "mu_reference": self.mu_reference,
            "onsager": self.onsager.tolist(),
            "onsager_asymmetry": self.asymmetry,
            "right_fluxes": dict(self.right_fluxes),
            "excluded_modes": list(self.excluded_modes),
            "channel_breakdown": {k: np.asarray(v).tolist() for k, v in self.channel_breakdown.items()},
        }


def transport_report(model: EffectiveModel, mu: float | None = None) -> TransportReport:
    """All currents plus the Onsager matrix at the mean bath parameters.

    ``mu`` is the reference chemical potential of the heat current; it
    defaults to the mean of the two bath chemical potentials.
    """
    _two_baths(model)
    L, R = model.baths
    mu_ref = 0.5 * (L.mu + R.mu) if mu is None else float(mu)
    jn, tn = particle_current(model, breakdown=True)
    jnq, tnq = quasiparticle_current(model, breakdown=True)
    je, te = energy_current(model, breakdown=True)
    ons = onsager_matrix(model, LinearResponsePoint(mu_ref, 0.5 * (L.temperature + R.temperature)))
    mask = _conducting(model)
    return TransportReport(
        S=anomaly_factors(model.decomposition),
        J_N=jn,
        J_NQ=jnq,
        J_E=je,
        J_Q=je - mu_ref * jnq,
        mu_reference=mu_ref,
        onsager=ons.L,
        asymmetry=ons.asymmetry,
        channel_breakdown={"tau": transfer_factors(model), "J_N": tn, "J_NQ": tnq, "J_E": te},
        right_fluxes=bath_fluxes(model, 1),
        excluded_modes=tuple(int(k) for k in np.flatnonzero(~mask)),
    )
