import numpy as np
import pytest

from quadlind import Bath, CouplingRegion, FlatDensity, QuadraticHamiltonian


def random_fermion(rng, n, real=False, pairing=True, scale=1.0):
    Q = rng.normal(size=(n, n))
    P = rng.normal(size=(n, n))
    if not real:
        Q = Q + 1j * rng.normal(size=(n, n))
        P = P + 1j * rng.normal(size=(n, n))
    Q = scale * (Q + Q.conj().T) / 2
    P = scale * (P - P.T) / 2 if pairing else np.zeros((n, n))
    return QuadraticHamiltonian(Q, P, "fermion")


def random_boson(rng, n, real=False, pairing=True, margin=0.5):
    Q = rng.normal(size=(n, n))
    P = rng.normal(size=(n, n)) * 0.5
    if not real:
        Q = Q + 1j * rng.normal(size=(n, n))
        P = P + 1j * rng.normal(size=(n, n)) * 0.5
    Q = (Q + Q.conj().T) / 2
    P = (P + P.T) / 2 if pairing else np.zeros((n, n))
    H = np.block([[Q, P], [P.conj(), Q.conj()]])
    shift = margin - np.linalg.eigvalsh(H)[0]
    return QuadraticHamiltonian(Q + max(shift, 0.0) * np.eye(n), P, "boson")


def two_flat_baths(n, TL=2.0, TR=1.0, muL=0.3, muR=-0.2, gL=0.1, gR=0.15, left=(0,), right=None):
    right = (n - 1,) if right is None else right
    return [
        Bath(TL, muL, FlatDensity(gL), CouplingRegion(left)),
        Bath(TR, muR, FlatDensity(gR), CouplingRegion(right)),
    ]


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def random_gaussian(gen, rng, zeta=1, scale=1.0):
    """Random Gaussian density matrix on the oracle Fock space, with its correlators."""
    from quadlind import oracle

    n = gen.space.n_modes
    K = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    K = scale * (K + K.conj().T) / 2
    G = scale * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / 2
    G = (G - G.T) / 2 if zeta == 1 else (G + G.T) / 4
    if zeta == -1:
        # keep the quadratic form positive so the truncated state is well localized
        K = K + (2.0 - np.linalg.eigvalsh(K)[0]) * np.eye(n)
    rho = oracle.gaussian_state(gen, K, G)
    theta, kappa = oracle.two_point(gen, rho)
    return rho, theta, kappa


def bond_chain(J, D):
    """Open p-wave chain with bond-dependent hopping and pairing, no onsite terms.

    With an odd number of sites the sublattice structure forces an exact
    zero mode, and generic bonds keep the rest of the spectrum simple.
    """
    n = len(J) + 1
    Q = np.zeros((n, n))
    P = np.zeros((n, n))
    for j, (hop, pair) in enumerate(zip(J, D)):
        Q[j, j + 1] = Q[j + 1, j] = -hop
        P[j, j + 1], P[j + 1, j] = pair, -pair
    return QuadraticHamiltonian(Q, P, "fermion")


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
