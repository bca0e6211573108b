"""Brute-force reference solver on the many-body Fock space.

The master equation is rebuilt from scratch for small systems: the coupling
operator ``X_n = sum_p w_{p,n} (a_p + a_p^+)`` of every bath is written as a
matrix in the quasiparticle occupation basis and split into Bohr-frequency
components by masking its matrix elements with ``E(y) - E(x)``. Nothing from
the closed-form rate formulas is reused, so degenerate classes and zero
modes are covered automatically. The generator is

    L[rho] = -i[H, rho] + sum_n sum_w Gamma_n(w) (2 X_n(w) rho X_n(w)^+ - {X_n(w)^+ X_n(w), rho})

with ``H = sum_k omega_k b_k^+ b_k`` plus the Lamb-shift term
``sum_n sum_{w>0} s_n(w) X_n(w)^+ X_n(w)``.

This validates the solution machinery for the secular master equation; it
does not test the weak-coupling derivation that produced it.

Density matrices are vectorized row-major, ``vec(A rho B) = (A kron B^T) vec(rho)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .environment import gamma_function, lamb_kernel
from .errors import CapabilityError, ConfigurationError, NumericalFailure
from .lindblad_builder import EffectiveModel

__all__ = [
    "FockSpace",
    "DenseGenerator",
    "SteadyStateResult",
    "build_generator",
    "integrate",
    "expectation",
    "steady_state",
    "gaussian_state",
    "thermal_state",
    "two_point",
    "flux",
    "product_state",
]

DEFAULT_CAP = 4096
DEFAULT_BOSON_CUTOFF = 8


@dataclass(frozen=True)
class FockSpace:
    """Occupation-number basis of ``n_modes`` quasiparticle modes.

    Fermionic operators carry Jordan-Wigner strings; bosonic ladders are
    truncated at ``cutoff`` quanta per mode.
    """

    zeta: int
    n_modes: int
    cutoff: int = DEFAULT_BOSON_CUTOFF
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.dimension > self.cap:
            raise CapabilityError(
                f"Fock space dimension {self.dimension} exceeds the cap of {self.cap} states"
            )

    @property
    def local_dim(self) -> int:
        return 2 if self.zeta == 1 else self.cutoff + 1

    @property
    def dimension(self) -> int:
        return self.local_dim**self.n_modes

    def occupations(self) -> np.ndarray:
        """``(d, N)`` integer occupations, mode 0 is the most significant digit."""
        digits = itertools.product(range(self.local_dim), repeat=self.n_modes)
        return np.array(list(digits), dtype=int).reshape(self.dimension, self.n_modes)

    def annihilators(self) -> list:
        """Sparse matrices of ``b_k``."""
        m = self.local_dim
        low = sp.diags(np.sqrt(np.arange(1, m)), 1, shape=(m, m), format="csr")
        eye = sp.identity(m, format="csr")
        string = sp.diags([1.0, -1.0], format="csr") if self.zeta == 1 else eye
        ops = []
        for k in range(self.n_modes):
            factors = [string] * k + [low] + [eye] * (self.n_modes - k - 1)
            op = factors[0]
            for f in factors[1:]:
                op = sp.kron(op, f, format="csr")
            ops.append(op.astype(complex))
        return ops


@dataclass
class DenseGenerator:
    space: FockSpace
    L: sp.csr_matrix
    H: np.ndarray
    b: list
    a: list
    bohr: dict
    """``bath -> list of (omega, X(omega))`` for the non-negative frequencies."""

    @property
    def dimension(self) -> int:
        return self.space.dimension

    def apply(self, rho: np.ndarray) -> np.ndarray:
        d = self.dimension
        return (self.L @ rho.reshape(-1)).reshape(d, d)


def _cluster(values: np.ndarray, tol: float) -> list:
    """Single-linkage clusters of sorted values, returned as mean frequencies."""
    vals = np.sort(values)
    groups, current = [], [vals[0]]
    for v in vals[1:]:
        if v - current[-1] > tol:
            groups.append(current)
            current = []
        current.append(v)
    groups.append(current)
    return [float(np.mean(g)) for g in groups]


def _bohr_components(X: sp.csr_matrix, energies: np.ndarray, tol: float) -> list:
    """Split ``X`` into ``X(w)`` with ``[H, X(w)] = -w X(w)``, ``w >= 0`` only."""
    coo = X.tocoo()
    keep = np.abs(coo.data) > 1e-14
    rows, cols, data = coo.row[keep], coo.col[keep], coo.data[keep]
    if data.size == 0:
        return []
    # X(w) maps |x> to |y> with E(x) - E(y) = w
    lowering = energies[cols] - energies[rows]
    freqs = _cluster(lowering, tol)
    d = X.shape[0]
    out = []
    for w in freqs:
        if w < -tol:
            continue
        sel = np.abs(lowering - w) <= tol
        if not sel.any():
            continue
        out.append((max(w, 0.0), sp.csr_matrix((data[sel], (rows[sel], cols[sel])), shape=(d, d))))
    return out


def _super_left_right(A, B):
    """Superoperator of ``rho -> A rho B``."""
    return sp.kron(A, B.T, format="csr")


def _bath_dissipator(comps, bath, zeta: int, d: int) -> sp.csr_matrix:
    """Superoperator of one bath from its non-negative Bohr components.

    The component at ``-w`` is taken as ``X(w)^+``.
    """
    eye = sp.identity(d, format="csr", dtype=complex)
    out = sp.csr_matrix((d * d, d * d), dtype=complex)
    for w, Xw in comps:
        pairs = [(Xw, float(gamma_function(bath, zeta, w)))]
        if w > 0:
            pairs.append((Xw.conj().T.tocsr(), float(gamma_function(bath, zeta, -w))))
        for L_op, rate in pairs:
            if rate == 0.0:
                continue
            LdL = (L_op.conj().T @ L_op).tocsr()
            out = out + rate * (
                2.0 * _super_left_right(L_op, L_op.conj().T)
                - _super_left_right(LdL, eye)
                - _super_left_right(eye, LdL)
            )
    return out.tocsr()


def build_generator(
    model: EffectiveModel,
    cutoff: int = DEFAULT_BOSON_CUTOFF,
    cap: int = DEFAULT_CAP,
    lamb: bool = True,
) -> DenseGenerator:
    """Assemble the many-body generator of ``model`` on its Fock space."""
    space = FockSpace(model.zeta, model.n_modes, cutoff, cap)
    dec = model.decomposition
    occ = space.occupations()
    energies = occ @ dec.omegas
    b = space.annihilators()
    d = space.dimension
    eye = sp.identity(d, format="csr", dtype=complex)
    a = [
        sum((dec.A[p, k] * b[k] + dec.B[p, k] * b[k].conj().T for k in range(model.n_modes)),
            sp.csr_matrix((d, d), dtype=complex))
        for p in range(model.n_modes)
    ]
    tol = max(model.cluster_tol, 1e-9)

    H = sp.diags(energies.astype(complex), format="csr")
    bohr = {}
    dissipator = sp.csr_matrix((d * d, d * d), dtype=complex)
    for n, bath in enumerate(model.baths):
        wvec = bath.region.weight_vector(model.n_modes)
        X = sp.csr_matrix((d, d), dtype=complex)
        for p in np.flatnonzero(wvec):
            X = X + wvec[p] * (a[p] + a[p].conj().T)
        comps = _bohr_components(X, energies, tol)
        bohr[n] = comps
        dissipator = dissipator + _bath_dissipator(comps, bath, model.zeta, d)
        if lamb:
            for w, Xw in comps:
                s = lamb_kernel(bath.spectral_density, model.zeta, w) if w > 0 else 0.0
                if s:
                    H = H + s * (Xw.conj().T @ Xw)
    H = H.tocsr()
    gen = -1j * (_super_left_right(H, eye) - _super_left_right(eye, H)) + dissipator
    return DenseGenerator(space, gen.tocsr(), H, b, a, bohr)


def integrate(gen: DenseGenerator, rho0: np.ndarray, t_grid, rtol: float = 1e-10, atol: float = 1e-12) -> np.ndarray:
    """Density matrices at the times ``t_grid`` (8th-order Dormand-Prince)."""
    t_grid = np.asarray(t_grid, dtype=float)
    d = gen.dimension
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (d, d):
        raise ConfigurationError(f"initial density matrix must be {d}x{d}")
    if np.any(np.diff(t_grid) < 0) or t_grid[0] < 0:
        raise ConfigurationError("time grid must be non-negative and ascending")
    if t_grid[-1] == t_grid[0]:
        return np.repeat(rho0[None], t_grid.size, axis=0)
    L = gen.L
    sol = solve_ivp(
        lambda t, y: L @ y,
        (float(t_grid[0]), float(t_grid[-1])),
        rho0.reshape(-1),
        method="DOP853",
        t_eval=t_grid,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise NumericalFailure(f"oracle integration failed: {sol.message}")
    return sol.y.T.reshape(t_grid.size, d, d)


def expectation(rho: np.ndarray, op) -> complex:
    op = op.toarray() if sp.issparse(op) else np.asarray(op)
    return complex(np.trace(rho @ op))


def two_point(gen: DenseGenerator, rho: np.ndarray, basis: str = "b") -> tuple[np.ndarray, np.ndarray]:
    """``(<c_k^+ c_q>, <c_k c_q>)`` for ``c = b`` (quasiparticles) or ``c = a`` (sites)."""
    ops = gen.b if basis == "b" else gen.a
    n = len(ops)
    theta = np.empty((n, n), dtype=complex)
    kappa = np.empty((n, n), dtype=complex)
    dense = [o.toarray() for o in ops]
    for k in range(n):
        left = rho @ dense[k].conj().T
        for q in range(n):
            theta[k, q] = np.trace(left @ dense[q])
            kappa[k, q] = np.trace(rho @ dense[k] @ dense[q])
    return theta, kappa


def flux(gen: DenseGenerator, model: EffectiveModel, rho: np.ndarray, bath: int, observable) -> float:
    """``Tr(D_n[rho] O)``, the rate at which bath ``n`` injects ``O`` into the system."""
    d = gen.dimension
    sub = _bath_dissipator(gen.bohr[bath], model.baths[bath], model.zeta, d)
    drho = (sub @ rho.reshape(-1)).reshape(d, d)
    return expectation(drho, observable).real


@dataclass(frozen=True)
class SteadyStateResult:
    rho: np.ndarray
    """A stationary density matrix (the unique one when ``nullity == 1``)."""
    nullity: int
    basis: np.ndarray | None = None
    """Null-space vectors (columns) when computed densely."""


def _hermitian_unit_trace(vec, d):
    rho = vec.reshape(d, d)
    tr = np.trace(rho)
    if abs(tr) < 1e-14:
        raise NumericalFailure("null vector of the generator is traceless")
    rho = rho / tr
    return 0.5 * (rho + rho.conj().T)


def steady_state(gen: DenseGenerator, dense_limit: int = 1024, rank_tol: float = 1e-10) -> SteadyStateResult:
    """Stationary state and null-space dimension of the generator.

    Small generators (``d^2 <= dense_limit``) use a dense SVD. Larger ones use
    shift-invert eigenvalues near zero to count the null space and a sparse
    solve with a trace row for the state.
    """
    d = gen.dimension
    L = gen.L
    if d * d <= dense_limit:
        M = L.toarray()
        u, s, vh = sla.svd(M)
        scale = max(1.0, s[0])
        null = np.flatnonzero(s <= rank_tol * scale)
        nullity = int(null.size)
        if nullity == 0:
            raise NumericalFailure(f"generator has no null vector (smallest singular value {s[-1]:.3g})")
        basis = vh[null].conj().T
        # pick the combination with largest trace, a positive stationary state for unique cases
        traces = basis.reshape(d, d, nullity).trace(axis1=0, axis2=1)
        vec = basis @ traces.conj()
        return SteadyStateResult(_hermitian_unit_trace(vec, d), nullity, basis)

    k = min(6, d * d - 2)
    try:
        vals = spla.eigs(L.tocsc(), k=k, sigma=0, which="LM", return_eigenvectors=False)
    except (spla.ArpackNoConvergence, RuntimeError) as exc:
        raise NumericalFailure(f"null-space estimation failed: {exc}") from None
    scale = max(1.0, float(spla.norm(L, 1)))
    nullity = int(np.sum(np.abs(vals) <= 1e-8 * scale))
    M = L.tolil()
    trace_row = np.zeros(d * d, dtype=complex)
    trace_row[:: d + 1] = 1.0
    M[0, :] = trace_row
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    if nullity > 1:
        # the bordered system is singular; return one stationary state by a least-squares solve
        vec = spla.lsqr(M.tocsr(), rhs, atol=1e-14, btol=1e-14, iter_lim=100000)[0]
    else:
        vec = spla.spsolve(M.tocsc(), rhs)
    return SteadyStateResult(_hermitian_unit_trace(vec, d), max(nullity, 1))


def gaussian_state(gen: DenseGenerator, h: np.ndarray, g: np.ndarray | None = None) -> np.ndarray:
    """``exp(-K) / Z`` for the quadratic form
    ``K = sum h_kq b_k^+ b_q + 1/2 sum (g_kq b_k^+ b_q^+ + h.c.)``.

    ``h`` must be Hermitian and ``g`` satisfy ``g^T = -zeta g``.
    """
    b = [o.toarray() for o in gen.b]
    n = len(b)
    K = np.zeros((gen.dimension,) * 2, dtype=complex)
    for k in range(n):
        for q in range(n):
            if h[k, q]:
                K += h[k, q] * b[k].conj().T @ b[q]
            if g is not None and g[k, q]:
                pair = g[k, q] * b[k].conj().T @ b[q].conj().T
                K += 0.5 * (pair + pair.conj().T)
    K = 0.5 * (K + K.conj().T)
    evals, vecs = np.linalg.eigh(K)
    weights = np.exp(-(evals - evals.min()))
    rho = (vecs * weights) @ vecs.conj().T
    return rho / np.trace(rho)


def thermal_state(gen: DenseGenerator, omegas, T: float, mu: float) -> np.ndarray:
    """Grand-canonical state of ``sum_k omega_k b_k^+ b_k`` at ``(T, mu)``."""
    n = np.asarray(omegas, dtype=float)
    return gaussian_state(gen, np.diag((n - mu) / T))


def product_state(space: FockSpace, occupations) -> np.ndarray:
    """Density matrix diagonal in the occupation basis with the given mean occupations.

    Fermionic modes are two-level mixtures; bosonic modes take a geometric
    (thermal) distribution truncated at the cutoff and renormalized.
    """
    occ = np.asarray(occupations, dtype=float)
    if occ.shape != (space.n_modes,):
        raise ConfigurationError(f"need {space.n_modes} occupations, got shape {occ.shape}")
    probs = np.ones(1)
    for n in occ:
        if space.zeta == 1:
            if not 0 <= n <= 1:
                raise ConfigurationError(f"fermionic occupation {n} outside [0, 1]")
            p = np.array([1.0 - n, n])
        else:
            if n < 0:
                raise ConfigurationError(f"bosonic occupation {n} is negative")
            x = n / (1.0 + n)
            p = x ** np.arange(space.local_dim)
            p /= p.sum()
        probs = np.kron(probs, p)
    return np.diag(probs).astype(complex)
