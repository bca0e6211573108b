"""Bogoliubov-Valatin diagonalization of quadratic Hamiltonians.

The transformation ``a = A b + B b^+`` is stored through the matrices ``A``
and ``B``; in Nambu form ``T = [[A, B], [B*, A*]]`` and it satisfies
``T I_zeta T^+ = I_zeta`` together with
``T^-1 D T = diag(omega, -omega)``, ``omega >= 0`` sorted ascending.

Fermionic models are diagonalized through the Hermitian BdG matrix. The
negative branch is never taken from the eigensolver: the hole partner of
each positive eigenvector ``x = (u, v)`` is its particle-hole conjugate
``(v*, u*)``, which makes the block structure of ``T`` exact. The null space
of the BdG matrix (fermionic zero modes) is handled by first building
self-conjugate (Majorana) vectors and pairing them, in a real gauge whenever
the Hamiltonian is real.

Stable bosonic models are diagonalized through the Cholesky factor of the
BdG matrix ``H = L L^+``: the Hermitian matrix ``L^+ I L`` has the same
spectrum as ``D`` and its eigenvectors map to metric-normalized
eigenvectors of ``D``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import InstabilityError, NumericalFailure, UnsupportedError
from .quadratic_model import QuadraticHamiltonian, build_bdg, nambu_metric, require_valid

__all__ = [
    "BogoliubovDecomposition",
    "CanonicalResiduals",
    "SpectrumClassification",
    "diagonalize",
    "verify_canonical",
    "reconstruct_residual",
    "classify_spectrum",
    "default_tolerances",
]

ZERO_TOL_FACTOR = 1e-10
CLUSTER_TOL_FACTOR = 1e-8


def default_tolerances(scale: float) -> tuple[float, float]:
    """``(zero_tol, cluster_tol)`` for a BdG matrix of spectral norm ``scale``."""
    s = max(1.0, float(scale))
    return ZERO_TOL_FACTOR * s, CLUSTER_TOL_FACTOR * s


@dataclass(frozen=True)
class BogoliubovDecomposition:
    A: np.ndarray
    B: np.ndarray
    omegas: np.ndarray
    zeta: int
    constant_shift: float
    scale: float = field(default=1.0)
    """Spectral norm of the BdG matrix, used to scale default tolerances."""

    @property
    def n_modes(self) -> int:
        return self.omegas.shape[0]

    @property
    def phi(self) -> np.ndarray:
        """``phi = A + B*``, the amplitude of ``a_p + a_p^+`` on each normal mode."""
        return self.A + self.B.conj()

    @property
    def T(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.B.conj(), self.A.conj()]])

    @property
    def tolerances(self) -> tuple[float, float]:
        return default_tolerances(self.scale)


def _particle_hole(X: np.ndarray) -> np.ndarray:
    n = X.shape[0] // 2
    return np.concatenate([X[n:].conj(), X[:n].conj()])


def _orth(M: np.ndarray, rtol: float = 1e-8) -> np.ndarray:
    if M.shape[1] == 0:
        return M
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return U[:, :0]
    return U[:, s > rtol * s[0]]


def _zero_mode_vectors(W: np.ndarray, real: bool) -> np.ndarray:
    """Pair an (even-dimensional) BdG null space into fermionic modes.

    Returns a ``2N x m`` matrix whose columns ``x`` satisfy, together with their
    conjugates ``C x``, orthonormality. For real Hamiltonians the columns are
    real, so every zero mode has real ``A`` and ``B``.
    """
    n2, dim = W.shape
    n = n2 // 2
    m = dim // 2
    if real:
        Wr = W.real if np.iscomplexobj(W) else W
        swapped = np.concatenate([Wr[n:], Wr[:n]])
        sym = _orth(Wr + swapped)
        anti = _orth(Wr - swapped)
        if sym.shape[1] == anti.shape[1] == m:
            return (sym - anti) / np.sqrt(2.0)
    # self-conjugate vectors x = (u, u*) live in a real space with coordinates (Re u, Im u)
    cand = np.concatenate([W + _particle_hole(W), 1j * (W - _particle_hole(W))], axis=1)
    U = cand[:n]
    R = _orth(np.concatenate([U.real, U.imag]))
    if R.shape[1] != 2 * m:
        raise NumericalFailure(
            f"could not build a self-conjugate basis of the {dim}-dimensional zero space"
        )
    u = (R[:n] + 1j * R[n:]) / np.sqrt(2.0)
    maj = np.concatenate([u, u.conj()])
    return (maj[:, 0::2] + 1j * maj[:, 1::2]) / np.sqrt(2.0)


def _fermion_general(H: np.ndarray, n: int, zero_tol: float | None, real: bool):
    Hm = H.real if real else H
    ev, V = np.linalg.eigh(Hm)
    scale = float(np.max(np.abs(ev)))
    if zero_tol is None:
        zero_tol = default_tolerances(scale)[0]
    zero = np.abs(ev) <= zero_tol
    pos = ev > zero_tol
    n_zero = int(zero.sum())
    if n_zero % 2 or n_zero // 2 + int(pos.sum()) != n:
        raise NumericalFailure(
            f"BdG spectrum is not particle-hole symmetric: {int(pos.sum())} positive, "
            f"{n_zero} zero eigenvalues for {n} modes"
        )
    cols = [V[:, pos]]
    omegas = [ev[pos]]
    if n_zero:
        cols.insert(0, _zero_mode_vectors(V[:, zero], real))
        omegas.insert(0, np.zeros(n_zero // 2))
    X = np.concatenate(cols, axis=1)
    return X[:n], X[n:].conj(), np.concatenate(omegas), scale


def _fermion_normal(Q: np.ndarray, zero_tol: float | None, real: bool):
    n = Q.shape[0]
    e, U = np.linalg.eigh(Q.real if real else Q)
    scale = float(np.max(np.abs(e)))
    if zero_tol is None:
        zero_tol = default_tolerances(scale)[0]
    hole = e < -zero_tol
    # holes: b_k = c_k^+, so a_j picks U_jk on b_k^+
    A = np.where(hole[None, :], 0.0, U).astype(complex)
    B = np.where(hole[None, :], U, 0.0).astype(complex)
    omegas = np.where(np.abs(e) <= zero_tol, 0.0, np.abs(e))
    return A, B, omegas, scale


def _boson_general(H: np.ndarray, n: int, real: bool):
    Hm = H.real if real else H
    ev = np.linalg.eigvalsh(Hm)
    if ev[0] <= 0:
        raise InstabilityError(
            f"bosonic BdG matrix is not positive definite (smallest eigenvalue {ev[0]:.3g}); "
            "the Hamiltonian must be stable"
        )
    L = np.linalg.cholesky(Hm)
    metric = nambu_metric(n, -1)
    W = L.conj().T @ (metric[:, None] * L)
    mu, Y = np.linalg.eigh(W)
    if not (np.all(mu[n:] > 0) and np.all(mu[:n] < 0)):
        raise NumericalFailure("metric eigenproblem does not have the expected inertia")
    X = (metric[:, None] * (L @ Y[:, n:])) / np.sqrt(mu[n:])
    return X[:n], X[n:].conj(), mu[n:], float(ev[-1])


def _boson_normal(Q: np.ndarray, real: bool):
    e, U = np.linalg.eigh(Q.real if real else Q)
    if e[0] <= 0:
        raise InstabilityError(
            f"bosonic Q is not positive definite (smallest eigenvalue {e[0]:.3g}); "
            "the Hamiltonian must be stable"
        )
    return U.astype(complex), np.zeros(Q.shape, dtype=complex), e, float(e[-1])


def diagonalize(
    h: QuadraticHamiltonian, zero_tol: float | None = None, validation_tol: float | None = None
) -> BogoliubovDecomposition:
    """Bogoliubov-Valatin transformation of ``h``.

    Parameters
    ----------
    h : QuadraticHamiltonian
    zero_tol : float, optional
        Fermionic eigenvalues with ``|omega| <= zero_tol`` are treated as exact
        zero modes. Defaults to ``1e-10 * max(1, ||H_bdg||_2)``.
    validation_tol : float, optional
        Tolerance of the input check, see :func:`quadlind.quadratic_model.validate`.

    Returns
    -------
    BogoliubovDecomposition
        ``omegas`` sorted ascending, all non-negative.

    Raises
    ------
    InstabilityError
        Bosonic model whose BdG matrix is not positive definite.
    NumericalFailure
        The eigensolver output does not have the structure required by a
        canonical transformation.
    """
    require_valid(h, validation_tol)
    n = h.n_sites
    real = h.is_real
    if h.zeta == 1:
        if h.is_normal:
            A, B, omegas, scale = _fermion_normal(h.Q, zero_tol, real)
        else:
            A, B, omegas, scale = _fermion_general(build_bdg(h).H_bdg, n, zero_tol, real)
    else:
        if h.is_normal:
            A, B, omegas, scale = _boson_normal(h.Q, real)
        else:
            A, B, omegas, scale = _boson_general(build_bdg(h).H_bdg, n, real)

    order = np.argsort(omegas, kind="stable")
    A = np.ascontiguousarray(np.asarray(A, dtype=complex)[:, order])
    B = np.ascontiguousarray(np.asarray(B, dtype=complex)[:, order])
    omegas = np.asarray(omegas, dtype=float)[order]
    shift = 0.5 * h.zeta * (float(np.trace(h.Q).real) - float(omegas.sum()))
    for arr in (A, B, omegas):
        arr.setflags(write=False)
    return BogoliubovDecomposition(A, B, omegas, h.zeta, shift, scale)


@dataclass(frozen=True)
class CanonicalResiduals:
    """Max-modulus residuals of the canonical constraints."""

    AdagA: float
    AAdag: float
    AdagB: float
    ABT: float
    nambu: float

    @property
    def max(self) -> float:
        return max(self.AdagA, self.AAdag, self.AdagB, self.ABT, self.nambu)


def _maxabs(M) -> float:
    return float(np.max(np.abs(M))) if np.size(M) else 0.0


def verify_canonical(dec: BogoliubovDecomposition, zeta: int | None = None) -> CanonicalResiduals:
    z = dec.zeta if zeta is None else zeta
    A, B = dec.A, dec.B
    n = A.shape[0]
    eye = np.eye(n)
    metric = nambu_metric(n, z)
    T = np.block([[A, B], [B.conj(), A.conj()]])
    return CanonicalResiduals(
        AdagA=_maxabs(A.conj().T @ A + z * B.T @ B.conj() - eye),
        AAdag=_maxabs(A @ A.conj().T + z * B @ B.conj().T - eye),
        AdagB=_maxabs(A.conj().T @ B + z * B.T @ A.conj()),
        ABT=_maxabs(A @ B.T + z * B @ A.T),
        nambu=_maxabs((T * metric[None, :]) @ T.conj().T - np.diag(metric)),
    )


def reconstruct_residual(dec: BogoliubovDecomposition, h: QuadraticHamiltonian) -> float:
    """``max |D T - T diag(omega, -omega)|``."""
    D = build_bdg(h).D
    T = dec.T
    lam = np.concatenate([dec.omegas, -dec.omegas])
    return _maxabs(D @ T - T * lam[None, :])


@dataclass(frozen=True)
class SpectrumClassification:
    zero_modes: tuple
    classes: tuple
    """Partition of all mode indices into degeneracy classes, ascending in energy.
    When zero modes exist they form the first class."""
    class_energies: tuple
    smallest_gap: float
    """Smallest spacing between energies of distinct classes (``inf`` if one class)."""

    @property
    def has_zero_mode(self) -> bool:
        return bool(self.zero_modes)

    @property
    def is_degenerate(self) -> bool:
        return any(len(c) > 1 for c in self.classes)

    def class_of(self, k: int) -> int:
        for lam, members in enumerate(self.classes):
            if k in members:
                return lam
        raise IndexError(k)


def classify_spectrum(
    dec: BogoliubovDecomposition,
    zero_tol: float | None = None,
    cluster_tol: float | None = None,
) -> SpectrumClassification:
    """Split modes into zero modes and degeneracy classes.

    Classes are formed by single linkage: consecutive sorted energies closer
    than ``cluster_tol`` belong to the same class.
    """
    dz, dc = dec.tolerances
    zero_tol = dz if zero_tol is None else zero_tol
    cluster_tol = dc if cluster_tol is None else cluster_tol
    w = np.asarray(dec.omegas)
    if np.any(np.diff(w) < 0):
        raise ValueError("omegas must be sorted ascending")
    zero = tuple(int(k) for k in np.flatnonzero(w <= zero_tol))
    if zero and dec.zeta == -1:
        raise UnsupportedError(
            "bosonic zero-energy (soft) modes need a dedicated diagonalization and are not supported"
        )
    classes, energies = [], []
    if zero:
        classes.append(zero)
        energies.append(0.0)
    current = []
    for k in range(len(zero), len(w)):
        if current and w[k] - w[current[-1]] > cluster_tol:
            classes.append(tuple(current))
            energies.append(float(np.mean(w[current])))
            current = []
        current.append(k)
    if current:
        classes.append(tuple(current))
        energies.append(float(np.mean(w[current])))
    gap = float(np.min(np.diff(energies))) if len(energies) > 1 else float("inf")
    return SpectrumClassification(zero, tuple(classes), tuple(energies), gap)
