import dataclasses
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_boson, random_fermion, two_flat_baths
from quadlind import (
    Bath,
    CouplingRegion,
    DivergenceError,
    FlatDensity,
    OhmicDensity,
    QuadraticHamiltonian,
    build_effective_model,
    diagonalize,
    kitaev_chain,
    local_rates,
    tight_binding_chain,
)
from quadlind.errors import CapabilityError, ConfigurationError
from quadlind.lindblad_builder import (
    QuasiDegeneracyWarning,
    coupling_weights,
    effective_couplings,
    eigenoperator_coefficients,
)


def test_zero_weights_give_zero_phi():
    dec = diagonalize(tight_binding_chain(3, 1.0, 2.0))
    np.testing.assert_array_equal(coupling_weights(dec, CouplingRegion((0, 1), [0.0, 0.0])), 0.0)


def test_normal_single_site_is_abs_a_squared():
    dec = diagonalize(tight_binding_chain(4, 0.8, 3.0))
    np.testing.assert_allclose(coupling_weights(dec, CouplingRegion((2,))), np.abs(dec.A[2]) ** 2)


def test_three_chain_end_site_weights():
    dec = diagonalize(tight_binding_chain(3, 1.0, 2.0))
    np.testing.assert_allclose(coupling_weights(dec, CouplingRegion((0,))), [0.25, 0.5, 0.25], atol=1e-14)


def test_flat_rates_are_scaled_weights():
    dec = diagonalize(tight_binding_chain(3, 1.0, 2.0))
    baths = [Bath(1.0, 0.0, FlatDensity(0.3), CouplingRegion((0,)))]
    np.testing.assert_allclose(effective_couplings(dec, baths), [[0.075, 0.15, 0.075]], atol=1e-14)


def test_decoupled_bath_row_is_zero():
    dec = diagonalize(tight_binding_chain(3, 1.0, 2.0))
    # the middle site has a node on the middle mode only; use an empty region instead
    baths = [Bath(1.0, 0.0, FlatDensity(0.3), CouplingRegion(()))]
    np.testing.assert_array_equal(effective_couplings(dec, baths), 0.0)


def test_ohmic_rates_against_scalar_path():
    dec = diagonalize(tight_binding_chain(3, 1.0, 2.0))
    eta, wc = 0.4, 3.0
    baths = [Bath(1.0, 0.0, OhmicDensity(eta, wc), CouplingRegion((0,)))]
    gamma = effective_couplings(dec, baths)[0]
    omegas = [2 - math.sqrt(2), 2.0, 2 + math.sqrt(2)]
    phis = [0.25, 0.5, 0.25]
    for g, w, p in zip(gamma, omegas, phis):
        assert g == pytest.approx(eta * w * math.exp(-w / wc) * p, rel=1e-13)


def test_bosonic_mu_above_gap_names_bath():
    dec = diagonalize(tight_binding_chain(3, 1.0, 3.0, statistics="boson"))
    baths = [
        Bath(1.0, 0.0, FlatDensity(0.1), CouplingRegion((0,))),
        Bath(1.0, 1.6, FlatDensity(0.1), CouplingRegion((2,))),  # omega_min = 3 - sqrt(2)
    ]
    with pytest.raises(DivergenceError, match="bath 1"):
        effective_couplings(dec, baths)


def test_eigenoperator_off_spectrum_is_empty():
    dec = diagonalize(tight_binding_chain(3, 1.0, 2.0))
    assert eigenoperator_coefficients(dec, CouplingRegion((0,)), 1.234) == []


def test_eigenoperator_single_mode():
    h = QuadraticHamiltonian([[1.5]], None)
    dec = diagonalize(h)
    (term,) = eigenoperator_coefficients(dec, CouplingRegion((0,), [0.5]), 1.5)
    assert term.mode == 0 and not term.dagger
    assert term.coefficient == pytest.approx(0.5 * dec.A[0, 0])
    (neg,) = eigenoperator_coefficients(dec, CouplingRegion((0,), [0.5]), -1.5)
    assert neg.dagger and neg.coefficient == pytest.approx(np.conj(term.coefficient))


def test_eigenoperator_degenerate_pair_matches_block():
    h = tight_binding_chain(3, 1.0, 3.0, periodic=True)
    baths = [Bath(1.0, 0.0, FlatDensity(0.1), CouplingRegion((0, 1), [1.0, 0.4]))]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = build_effective_model(h, baths)
    terms = eigenoperator_coefficients(model.decomposition, baths[0].region, 4.0)
    assert [t.mode for t in terms] == [1, 2]
    c = np.array([t.coefficient for t in terms])
    np.testing.assert_allclose(model.degeneracy.phi_blocks[0, 1], np.outer(c, c.conj()), atol=1e-14)


def test_three_chain_two_baths():
    model = build_effective_model(tight_binding_chain(3, 1.0, 2.0), two_flat_baths(3))
    assert model.gamma.shape == (2, 3)
    assert np.all(model.gamma > 0)
    assert model.zero_mode is None and model.degeneracy is None
    assert model.closed_form_available
    np.testing.assert_array_equal(model.omega_tilde, model.omegas)


def test_kitaev_pair_has_zero_mode_not_degeneracy():
    model = build_effective_model(kitaev_chain(2, 1.0, 1.0, 0.0), two_flat_baths(2))
    assert model.zero_mode is not None and model.zero_mode.index == 0
    assert model.degeneracy is None
    assert model.closed_form_available


def test_engineered_zero_mode_delta():
    h = QuadraticHamiltonian(np.diag([0.0, 4.0, 5.0]), [[0, 0, 0], [0, 0, 0.3], [0, -0.3, 0]])
    baths = [
        Bath(1.0, 0.0, FlatDensity(0.02), CouplingRegion((0,))),
        Bath(0.5, 0.1, OhmicDensity(0.01, 2.0), CouplingRegion((0, 1), [0.3, 0.7])),
    ]
    model = build_effective_model(h, baths)
    zm = model.zero_mode
    assert zm is not None
    expected = sum(float(b.J(0.0)) * model.Phi[n, zm.index] for n, b in enumerate(baths))
    assert zm.Delta == expected
    assert zm.Delta == pytest.approx(model.gamma[:, zm.index].sum(), abs=0)
    np.testing.assert_allclose(np.abs(zm.Psi), zm.Phi, atol=1e-14)
    assert zm.closed_form


def test_complex_weight_zero_mode_disables_closed_form():
    h = QuadraticHamiltonian(np.diag([0.0, 5.0]), None)
    baths = [Bath(1.0, 0.0, FlatDensity(0.2), CouplingRegion((0,), [np.exp(0.4j)]))]
    model = build_effective_model(h, baths)
    assert not model.zero_mode.closed_form
    with pytest.raises(CapabilityError):
        model.require_closed_form()


def test_degenerate_model_flags():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = build_effective_model(tight_binding_chain(3, 1.0, 3.0, periodic=True), two_flat_baths(3))
    assert model.is_degenerate and not model.closed_form_available
    with pytest.raises(CapabilityError):
        model.require_closed_form()


def _rotate_class(dec, members, U):
    A, B = dec.A.copy(), dec.B.copy()
    idx = list(members)
    A[:, idx] = A[:, idx] @ U
    B[:, idx] = B[:, idx] @ U.conj()
    return dataclasses.replace(dec, A=A, B=B)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_phi_block_spectrum_is_gauge_invariant(seed):
    rng = np.random.default_rng(seed)
    h = tight_binding_chain(4, 1.0, 3.0, periodic=True)
    baths = [Bath(1.0, 0.0, FlatDensity(0.1), CouplingRegion((0, 1), rng.normal(size=2) + 1j * rng.normal(size=2)))]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ref = build_effective_model(h, baths)
        X = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        U, _ = np.linalg.qr(X)
        lam = next(i for i, c in enumerate(ref.classification.classes) if len(c) == 2)
        members = ref.classification.classes[lam]
        dec = _rotate_class(ref.decomposition, members, U)
        other = build_effective_model(h, baths, decomposition=dec)
    a = np.linalg.eigvalsh(ref.degeneracy.phi_blocks[0, lam])
    b = np.linalg.eigvalsh(other.degeneracy.phi_blocks[0, lam])
    np.testing.assert_allclose(a, b, atol=1e-10)
    assert a[0] <= 1e-10 * max(a[-1], 1e-300) or a[-1] == 0
    assert a[0] >= -1e-12


def test_singleton_blocks_reduce_to_scalar_phi():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = build_effective_model(tight_binding_chain(3, 1.0, 3.0, periodic=True), two_flat_baths(3))
    blk = model.degeneracy.phi_blocks[0, 0]
    assert blk.shape == (1, 1)
    assert blk[0, 0].real == pytest.approx(model.Phi[0, 0])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.sampled_from([1, -1]), st.integers(0, 2**31 - 1))
def test_rates_non_negative(n, zeta, seed):
    rng = np.random.default_rng(seed)
    h = random_fermion(rng, n) if zeta == 1 else random_boson(rng, n)
    sites = tuple(sorted(rng.choice(n, size=rng.integers(1, n + 1), replace=False)))
    mu = 0.2 if zeta == 1 else -1.0
    baths = [Bath(0.7, mu, OhmicDensity(0.3, 2.0), CouplingRegion(sites, rng.normal(size=len(sites))))]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = build_effective_model(h, baths)
    assert np.all(model.gamma >= 0)


def test_quasi_degeneracy_warning():
    h = QuadraticHamiltonian(np.diag([1.0, 1.0 + 1e-4]), None)
    with pytest.warns(QuasiDegeneracyWarning):
        model = build_effective_model(h, [Bath(1.0, 0.0, FlatDensity(0.1), CouplingRegion((0, 1)))])
    assert any("secular" in n for n in model.notes)


def test_with_bath_parameters_only_changes_occupations():
    model = build_effective_model(tight_binding_chain(3, 1.0, 2.0), two_flat_baths(3))
    m2 = model.with_bath_parameters([1.0, 1.0], [0.0, 0.0])
    np.testing.assert_array_equal(m2.gamma, model.gamma)
    np.testing.assert_allclose(m2.f_at_modes[0], m2.f_at_modes[1])
    assert m2.baths[0].temperature == 1.0


def test_builder_rejects_out_of_range_sites():
    with pytest.raises(ConfigurationError):
        build_effective_model(tight_binding_chain(3), [Bath(1.0, 0.0, FlatDensity(0.1), CouplingRegion((5,)))])


def test_local_rates_at_chemical_potential():
    b = Bath(1.0, 0.7, FlatDensity(0.4), CouplingRegion((0, 2)))
    up, down = local_rates([b], 0.7, 1, 3)
    np.testing.assert_allclose(up, [0.2, 0.0, 0.2])
    np.testing.assert_allclose(down, [0.2, 0.0, 0.2])


def test_local_rates_cold_fermions():
    b = Bath(1e-3, 0.0, OhmicDensity(1.0, 2.0), CouplingRegion((0,)))
    up, down = local_rates([b], 1.0, 1, 1)
    assert up[0] == pytest.approx(0.0, abs=1e-300)
    assert down[0] == pytest.approx(math.exp(-0.5))


def test_local_rates_sum_over_baths():
    b1 = Bath(1.0, 0.0, FlatDensity(0.3), CouplingRegion((0, 1)))
    b2 = Bath(2.0, 0.5, OhmicDensity(0.5, 1.0), CouplingRegion((1,)))
    up, down = local_rates([b1, b2], 1.2, -1, 2)
    f1 = 1 / math.expm1(1.2)
    f2 = 1 / math.expm1(0.35)
    J2 = 0.5 * 1.2 * math.exp(-1.2)
    assert up[1] == pytest.approx(0.3 * f1 + J2 * f2)
    assert down[1] == pytest.approx(0.3 * (1 + f1) + J2 * (1 + f2))
    assert up[0] == pytest.approx(0.3 * f1)


def test_local_rates_need_positive_frequency():
    with pytest.raises(ConfigurationError):
        local_rates([], 0.0, 1, 1)
