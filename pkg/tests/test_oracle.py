import warnings

import numpy as np
import pytest
import scipy.sparse as sp

from conftest import bond_chain, random_fermion, two_flat_baths
from quadlind import (
    Bath,
    CouplingRegion,
    FlatDensity,
    QuadraticHamiltonian,
    build_effective_model,
    harmonic_chain,
    kitaev_chain,
    oracle,
    tight_binding_chain,
)
from quadlind.environment import distribution
from quadlind.errors import CapabilityError, ConfigurationError


def _model(h, baths):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return build_effective_model(h, baths)


def _single_mode(zeta, omega=1.3, T=0.7, mu=0.2):
    stats = "fermion" if zeta == 1 else "boson"
    h = QuadraticHamiltonian([[omega]], None, stats)
    return _model(h, [Bath(T, mu, FlatDensity(0.2), CouplingRegion((0,)))])


@pytest.mark.parametrize("zeta", [1, -1])
def test_single_mode_fixed_point_is_bath_distribution(zeta):
    model = _single_mode(zeta)
    gen = oracle.build_generator(model, cutoff=40)
    rho = oracle.steady_state(gen).rho
    n = oracle.expectation(rho, gen.b[0].conj().T @ gen.b[0]).real
    assert n == pytest.approx(distribution(1.3, 0.7, 0.2, zeta), rel=1e-9)


def test_fock_space_basics():
    space = oracle.FockSpace(1, 3)
    assert space.dimension == 8
    b = [x.toarray() for x in space.annihilators()]
    for i in range(3):
        for j in range(3):
            anti = b[i] @ b[j].conj().T + b[j].conj().T @ b[i]
            np.testing.assert_allclose(anti, np.eye(8) * (i == j), atol=1e-15)
            np.testing.assert_allclose(b[i] @ b[j] + b[j] @ b[i], 0, atol=1e-15)
    occ = space.occupations()
    num = b[0].conj().T @ b[0]
    np.testing.assert_allclose(np.diag(num).real, occ[:, 0])


def test_cap_is_enforced():
    with pytest.raises(CapabilityError):
        oracle.FockSpace(1, 13, cap=4096)
    with pytest.raises(CapabilityError):
        oracle.FockSpace(-1, 4, cutoff=8, cap=4096)


def test_trace_preserved(rng):
    model = _model(random_fermion(rng, 3), two_flat_baths(3))
    gen = oracle.build_generator(model)
    d = gen.dimension
    # d/dt Tr(rho) = 0 means the trace functional annihilates every column of L
    tr = np.zeros(d * d)
    tr[:: d + 1] = 1.0
    assert np.abs(tr @ gen.L).max() <= 1e-12
    rho0 = oracle.product_state(gen.space, [0.1, 0.8, 0.4])
    rhos = oracle.integrate(gen, rho0, [0.0, 1.0, 5.0])
    for r in rhos:
        assert abs(np.trace(r) - 1) <= 1e-12


def test_integrate_at_zero_returns_initial(rng):
    model = _model(random_fermion(rng, 2), two_flat_baths(2))
    gen = oracle.build_generator(model)
    rho0 = oracle.product_state(gen.space, [0.3, 0.6])
    out = oracle.integrate(gen, rho0, [0.0])
    np.testing.assert_allclose(out[0], rho0, atol=1e-15)
    with pytest.raises(ConfigurationError):
        oracle.integrate(gen, rho0, [1.0, 0.5])
    with pytest.raises(ConfigurationError):
        oracle.integrate(gen, np.eye(3), [0.0])


def test_uncoupled_system_is_frozen():
    h = tight_binding_chain(2, 1.0, 2.0)
    model = _model(h, [Bath(1.0, 0.0, FlatDensity(0.0), CouplingRegion((0,)))])
    gen = oracle.build_generator(model)
    rho0 = oracle.product_state(gen.space, [0.25, 0.75])
    out = oracle.integrate(gen, rho0, [0.0, 3.0])
    np.testing.assert_allclose(out[-1], rho0, atol=1e-12)
    assert abs(oracle.expectation(out[-1], np.eye(gen.dimension)) - 1) < 1e-14


def test_unique_steady_state_nullity(rng):
    model = _model(random_fermion(rng, 3), two_flat_baths(3))
    assert oracle.steady_state(oracle.build_generator(model)).nullity == 1


def test_decoupled_mode_raises_nullity():
    h = QuadraticHamiltonian(np.diag([1.0, 2.0]), None)
    model = _model(h, [Bath(1.0, 0.0, FlatDensity(0.1), CouplingRegion((0,)))])
    res = oracle.steady_state(oracle.build_generator(model))
    assert res.nullity > 1


def test_kitaev_zero_mode_parity_nullity():
    model = _model(kitaev_chain(2, 1.0, 1.0, 0.0), two_flat_baths(2))
    gen = oracle.build_generator(model)
    res = oracle.steady_state(gen)
    assert res.nullity == 2
    k0 = model.zero_mode.index
    n0 = oracle.expectation(res.rho, gen.b[k0].conj().T @ gen.b[k0]).real
    assert n0 == pytest.approx(0.5, abs=1e-9)


def test_zero_mode_steady_occupation_half():
    model = _model(bond_chain([1.0, 0.6], [0.5, 0.3]), two_flat_baths(3, left=(0, 1)))
    gen = oracle.build_generator(model)
    res = oracle.steady_state(gen)
    d = gen.dimension
    num = (gen.b[0].conj().T @ gen.b[0]).toarray()
    # extra null vectors are traceless coherences between parity sectors
    for vec in res.basis.T:
        rho = vec.reshape(d, d)
        if abs(np.trace(rho)) > 1e-8:
            assert (np.trace(rho @ num) / np.trace(rho)).real == pytest.approx(0.5, abs=1e-10)
        else:
            assert abs(np.trace(rho @ num)) < 1e-8


def test_sparse_steady_state_path(rng):
    model = _model(random_fermion(rng, 4), two_flat_baths(4))
    gen = oracle.build_generator(model)
    dense = oracle.steady_state(gen)
    sparse = oracle.steady_state(gen, dense_limit=0)
    assert sparse.nullity == 1
    np.testing.assert_allclose(sparse.rho, dense.rho, atol=1e-10)


def test_boson_cutoff_convergence():
    model = _model(harmonic_chain(2, 0.5, 3.0), two_flat_baths(2, TL=0.8, TR=0.5, muL=0.0, muR=0.0))
    occ = []
    for cutoff in (8, 16):
        gen = oracle.build_generator(model, cutoff=cutoff)
        rho = oracle.steady_state(gen).rho
        occ.append(np.real(np.diag(oracle.two_point(gen, rho)[0])))
    np.testing.assert_allclose(occ[0], occ[1], rtol=1e-6)


def test_product_state_occupations():
    space = oracle.FockSpace(-1, 2, cutoff=30)
    rho = oracle.product_state(space, [0.2, 0.5])
    b = [x.toarray() for x in space.annihilators()]
    for k, n in enumerate([0.2, 0.5]):
        assert np.trace(rho @ b[k].conj().T @ b[k]).real == pytest.approx(n, rel=1e-6)
    with pytest.raises(ConfigurationError):
        oracle.product_state(oracle.FockSpace(1, 2), [0.5, 1.2])
    with pytest.raises(ConfigurationError):
        oracle.product_state(space, [0.1])


def test_thermal_state_is_diagonal_fermi():
    space_model = _single_mode(1)
    gen = oracle.build_generator(space_model)
    rho = oracle.thermal_state(gen, [1.3], 0.7, 0.2)
    assert rho[1, 1].real == pytest.approx(distribution(1.3, 0.7, 0.2, 1))
    assert sp.issparse(gen.L)
