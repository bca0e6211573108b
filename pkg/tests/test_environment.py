import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import exp1, expi

from quadlind import Bath, ConfigurationError, CouplingRegion, DivergenceError, FlatDensity, OhmicDensity, TabulatedDensity
from quadlind.environment import (
    distribution,
    gamma_function,
    lamb_kernel,
    lamb_shift,
    occupation,
    principal_value_integrals,
)
from quadlind.errors import NumericalFailure


def bath(J, T=1.0, mu=0.0):
    return Bath(T, mu, J, CouplingRegion((0,)))


def test_distribution_values():
    assert distribution(0.3, 1.0, 0.3, 1) == 0.5
    assert distribution(1.0, 1.0, 0.0, 1) == pytest.approx(0.268941421, rel=1e-8)
    assert distribution(1.0, 1.0, 0.0, -1) == pytest.approx(0.581976707, rel=1e-8)


def test_bose_divergence():
    with pytest.raises(DivergenceError):
        distribution(0.5, 1.0, 0.5, -1)


@settings(max_examples=100, deadline=None)
@given(st.floats(-50, 50), st.floats(0.01, 10), st.floats(-5, 5))
def test_fermi_range(w, T, mu):
    f = distribution(w, T, mu, 1)
    assert 0.0 <= f <= 1.0


def test_gamma_branches():
    b = bath(FlatDensity(1.0), T=1.0, mu=0.0)
    assert gamma_function(b, 1, 1e-300) == pytest.approx(0.5)
    assert gamma_function(b, 1, -1.0) == pytest.approx(0.268941421, rel=1e-8)
    assert gamma_function(b, 1, 0.0) == 1.0


def test_gamma_ohmic_against_direct_formula():
    b = bath(OhmicDensity(1.0, 10.0), T=1.0, mu=0.0)
    expected = 2 * math.exp(-0.2) * (1 - 1 / (1 + math.exp(2.0)))
    assert gamma_function(b, 1, 2.0) == pytest.approx(expected, rel=1e-13)


@settings(max_examples=50, deadline=None)
@given(st.floats(-20, 20), st.sampled_from([1, -1]))
def test_gamma_non_negative(w, zeta):
    mu = -25.0 if zeta == -1 else 0.3
    b = bath(OhmicDensity(0.7, 3.0), T=0.8, mu=mu)
    if zeta == -1 and w == 0:
        return
    assert gamma_function(b, zeta, w) >= 0


def test_kms_detailed_balance():
    b = bath(OhmicDensity(1.0, 4.0), T=0.7, mu=0.2)
    for zeta in (1, -1):
        bb = b if zeta == 1 else bath(OhmicDensity(1.0, 4.0), T=0.7, mu=-0.5)
        for w in (0.6, 1.3, 3.0):
            ratio = gamma_function(bb, zeta, -w) / gamma_function(bb, zeta, w)
            assert ratio == pytest.approx(math.exp(-(w - bb.mu) / bb.temperature), rel=1e-12)


@pytest.mark.parametrize("w,c", [(1.0, 1.0), (0.3, 2.0), (4.0, 1.5)])
def test_ohmic_pv_against_exponential_integrals(w, c):
    # PV int_0^inf e exp(-e/c)/(w-e) = -c + w exp(-w/c) Ei(w/c)
    # int_0^inf e exp(-e/c)/(w+e) = c - w exp(w/c) E1(w/c)
    a = w / c
    minus, plus = principal_value_integrals(OhmicDensity(1.0, c), w)
    assert minus == pytest.approx(-c + w * math.exp(-a) * expi(a), rel=1e-8)
    assert plus == pytest.approx(c - w * math.exp(a) * exp1(a), rel=1e-8)


def test_pv_tent_table_against_closed_form():
    # J = 1 - |e - 1| on [0, 2]; PV int J/(w - e) at w = 1 vanishes by symmetry
    dens = TabulatedDensity(np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 0.0]))
    minus, plus = principal_value_integrals(dens, 1.0)
    assert abs(minus) < 1e-10
    # int_0^1 e/(1+e) + int_1^2 (2-e)/(1+e) = (1 - ln 2) + (3 ln(3/2) - 1)
    assert plus == pytest.approx(3 * math.log(1.5) - math.log(2.0), rel=1e-9)


def test_table_not_decaying_raises():
    dens = TabulatedDensity(np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 1.0]))
    with pytest.raises(NumericalFailure):
        lamb_kernel(dens, 1, 0.5)


def test_flat_has_no_lamb_shift():
    assert lamb_kernel(FlatDensity(2.0), 1, 1.3) == 0.0
    shifts = lamb_shift([bath(FlatDensity(1.0))], 1, [[1.0, 1.0]], [0.5, 2.0])
    np.testing.assert_array_equal(shifts, 0.0)


def test_zero_coupling_has_no_lamb_shift():
    shifts = lamb_shift([bath(OhmicDensity(1.0, 1.0))], 1, [[0.0, 0.0]], [0.5, 2.0])
    np.testing.assert_array_equal(shifts, 0.0)


def test_fermion_zero_frequency_kernel_vanishes():
    # the two integrals coincide up to sign at w -> 0 for fermions
    dens = OhmicDensity(1.0, 1.0)
    small = lamb_kernel(dens, 1, 1e-6)
    assert abs(small) < 1e-4
    assert lamb_kernel(dens, 1, 0.0) == 0.0


def test_ohmic_kernel_value_frozen():
    # unit ohmic bath at w = c = 1, fermions: (1/pi)[(-1 + Ei(1)/e) + (1 - e E1(1))]
    expected = (-1 + math.exp(-1) * expi(1.0) + 1 - math.e * exp1(1.0)) / math.pi
    assert lamb_kernel(OhmicDensity(1.0, 1.0), 1, 1.0) == pytest.approx(expected, rel=1e-8)
    assert expected == pytest.approx(0.0320943967, abs=1e-9)


def test_density_validation():
    with pytest.raises(ConfigurationError):
        FlatDensity(-1.0)
    with pytest.raises(ConfigurationError):
        OhmicDensity(1.0, 0.0)
    with pytest.raises(ConfigurationError):
        TabulatedDensity(np.array([0.0, 0.0]), np.array([1.0, 1.0]))
    with pytest.raises(ConfigurationError):
        Bath(0.0, 0.0, FlatDensity(1.0))


def test_occupation_uses_bath_parameters():
    b = Bath(2.0, 0.5, FlatDensity(1.0))
    assert occupation(b, 1, 0.5) == 0.5
