"""Thermal baths: occupations, spectral densities, rates and Lamb shifts.

Units are hbar = k_B = 1 throughout; temperatures and chemical potentials are
energies.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import expit

from .errors import ConfigurationError, DivergenceError, NumericalFailure
from .quadratic_model import CouplingRegion

__all__ = [
    "FlatDensity",
    "OhmicDensity",
    "TabulatedDensity",
    "Bath",
    "distribution",
    "occupation",
    "gamma_function",
    "principal_value_integrals",
    "lamb_kernel",
    "lamb_shift",
]

PV_EPSREL = 1e-8


@dataclass(frozen=True)
class FlatDensity:
    """Wide-band spectral density ``J(w) = gamma0`` for ``w >= 0``."""

    gamma0: float
    kind = "flat"

    def __post_init__(self):
        if not self.gamma0 >= 0:
            raise ConfigurationError(f"flat spectral density needs gamma0 >= 0, got {self.gamma0}")

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        return np.where(omega >= 0, float(self.gamma0), 0.0)


@dataclass(frozen=True)
class OhmicDensity:
    """``J(w) = eta * w * exp(-w / omega_c)`` for ``w >= 0``."""

    eta: float
    omega_c: float
    kind = "ohmic"

    def __post_init__(self):
        if not self.eta >= 0:
            raise ConfigurationError(f"ohmic eta must be >= 0, got {self.eta}")
        if not self.omega_c > 0:
            raise ConfigurationError(f"ohmic cutoff must be > 0, got {self.omega_c}")

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        w = np.maximum(omega, 0.0)
        return np.where(omega >= 0, self.eta * w * np.exp(-w / self.omega_c), 0.0)


@dataclass(frozen=True)
class TabulatedDensity:
    """Piecewise-linear spectral density through sampled points, zero outside the table."""

    omega: np.ndarray
    values: np.ndarray
    kind = "table"

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if w.ndim != 1 or w.shape != v.shape or w.size < 2:
            raise ConfigurationError("tabulated spectral density needs >= 2 matching (w, J) samples")
        if np.any(np.diff(w) <= 0):
            raise ConfigurationError("tabulated frequencies must be strictly increasing")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ConfigurationError("tabulated spectral density must be finite and non-negative")
        if w[0] < 0:
            raise ConfigurationError("tabulated frequencies must be non-negative")
        w.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "values", v)

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        return np.interp(omega, self.omega, self.values, left=0.0, right=0.0)


@dataclass(frozen=True)
class Bath:
    temperature: float
    mu: float
    spectral_density: object
    region: CouplingRegion = field(default_factory=lambda: CouplingRegion(()))

    def __post_init__(self):
        if not self.temperature > 0:
            raise ConfigurationError(f"bath temperature must be > 0, got {self.temperature}")
        if not np.isfinite(self.mu):
            raise ConfigurationError("bath chemical potential must be finite")

    def J(self, omega):
        return self.spectral_density(omega)


def distribution(omega, T: float, mu: float, zeta: int):
    """Fermi-Dirac (``zeta=+1``) or Bose-Einstein (``zeta=-1``) occupation."""
    x = (np.asarray(omega, dtype=float) - mu) / T
    if zeta == 1:
        return expit(-x)
    if np.any(x <= 0):
        raise DivergenceError(
            f"Bose-Einstein occupation diverges for omega <= mu (mu={mu}, min omega="
            f"{float(np.min(omega)):.6g})"
        )
    return 1.0 / np.expm1(x)


def occupation(bath: Bath, zeta: int, omega):
    return distribution(omega, bath.temperature, bath.mu, zeta)


def gamma_function(bath: Bath, zeta: int, omega):
    """Half Fourier transform of the bath correlation function.

    ``J(w)[1 - zeta f(w)]`` for ``w > 0``, ``J(-w) f(-w)`` for ``w < 0`` and
    ``J(0)[1 + (1 - zeta) f(0)]`` at ``w = 0``.
    """
    omega = np.asarray(omega, dtype=float)
    out = np.zeros_like(omega)
    pos, neg, zero = omega > 0, omega < 0, omega == 0
    if pos.any():
        w = omega[pos]
        out[pos] = bath.J(w) * (1.0 - zeta * occupation(bath, zeta, w))
    if neg.any():
        w = -omega[neg]
        out[neg] = bath.J(w) * occupation(bath, zeta, w)
    if zero.any():
        J0 = float(bath.J(0.0))
        # for bosons f(0) diverges, so only fermions (where the factor is 1) reach here safely
        out[zero] = J0 if zeta == 1 else J0 * (1.0 + 2.0 * float(occupation(bath, zeta, 0.0)))
    return out if out.ndim else float(out)


def _quad(f, a, b, points=None):
    kwargs = dict(epsrel=PV_EPSREL, epsabs=1e-13, limit=500, full_output=1)
    if points is not None and np.isfinite(b):
        inner = [p for p in points if a < p < b]
        if inner:
            kwargs["points"] = inner
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = integrate.quad(f, a, b, **kwargs)
    if len(res) == 4:
        raise NumericalFailure(f"principal-value quadrature did not converge on [{a}, {b}]: {res[3]}")
    return res[0]


def principal_value_integrals(density, omega: float) -> tuple[float, float]:
    """``(PV int J(e)/(w - e) de, int J(e)/(w + e) de)`` over ``e >= 0``, for ``w > 0``.

    The singular integral is split at ``e = w`` and the two sides are paired,
    ``int_0^w [J(w-u) - J(w+u)]/u du``, which has a finite integrand, plus the
    regular tail ``-int_{2w}^inf J(e)/(e - w) de``.
    """
    if not omega > 0:
        raise ValueError("principal-value integrals are defined here for omega > 0")
    if isinstance(density, TabulatedDensity):
        if density.values[-1] != 0.0:
            # the zero extension would put a jump at the table edge: log-divergent PV integral
            raise NumericalFailure(
                "tabulated spectral density must decay to zero at its last sample "
                "for the Lamb-shift integrals to converge"
            )
        upper = float(density.omega[-1])
        points = list(density.omega)
    else:
        upper = np.inf
        points = None

    def paired(u):
        if u == 0.0:
            return 0.0
        return (float(density(omega - u)) - float(density(omega + u))) / u

    kinks = None if points is None else [abs(p - omega) for p in points]
    near = _quad(paired, 0.0, omega, kinks)
    tail = 0.0
    if 2 * omega < upper:
        tail = _quad(lambda e: float(density(e)) / (e - omega), 2 * omega, upper, points)
    plus = _quad(lambda e: float(density(e)) / (omega + e), 0.0, upper, points)
    return near - tail, plus


def lamb_kernel(density, zeta: int, omega: float) -> float:
    """Per-unit-weight frequency shift ``(1/pi)[PV int J/(w-e) + zeta int J/(w+e)]``.

    Flat (wide-band) densities give exactly zero. At ``w = 0`` the two
    integrals cancel identically for fermions, so zero modes are not shifted.
    """
    if isinstance(density, FlatDensity) or omega <= 0:
        return 0.0
    minus, plus = principal_value_integrals(density, float(omega))
    return (minus + zeta * plus) / np.pi


def lamb_shift(baths, zeta: int, Phi, omegas) -> np.ndarray:
    """Frequency shifts ``phi_k = sum_n Phi_{n,k} * lamb_kernel(J_n, w_k)``."""
    Phi = np.atleast_2d(np.asarray(Phi, dtype=float))
    omegas = np.asarray(omegas, dtype=float)
    shifts = np.zeros(omegas.shape[0])
    for n, bath in enumerate(baths):
        if isinstance(bath.spectral_density, FlatDensity):
            continue
        row = Phi[n]
        for k, w in enumerate(omegas):
            if row[k] != 0.0:
                shifts[k] += row[k] * lamb_kernel(bath.spectral_density, zeta, w)
    return shifts
