"""Relaxation of an exact fermionic zero mode.

An odd p-wave chain without onsite terms hosts a mode at zero energy. Its
occupation relaxes to one half at rate 4 Delta whatever the bath
temperatures and chemical potentials; the closed form is compared with a
direct integration of the many-body master equation.
"""
import numpy as np

from quadlind import Bath, CouplingRegion, FlatDensity, QuadraticHamiltonian, build_effective_model, oracle
from quadlind import dynamics as dyn

Q = np.zeros((3, 3))
P = np.zeros((3, 3))
for j, (hop, pair) in enumerate([(1.0, 0.5), (0.6, 0.3)]):
    Q[j, j + 1] = Q[j + 1, j] = -hop
    P[j, j + 1], P[j + 1, j] = pair, -pair
h = QuadraticHamiltonian(Q, P, "fermion")
baths = [
    Bath(2.0, 0.3, FlatDensity(0.1), CouplingRegion((0, 1))),
    Bath(1.0, -0.2, FlatDensity(0.15), CouplingRegion((2,))),
]
model = build_effective_model(h, baths)
k0 = model.zero_mode.index
print("mode energies", np.round(model.omegas, 6), " zero-mode rate 4*Delta =", 4 * model.zero_mode.Delta)

occ0 = [0.95, 0.2, 0.7]
gen = oracle.build_generator(model)
times = np.linspace(0.0, 10.0, 11)
rhos = oracle.integrate(gen, oracle.product_state(gen.space, occ0), times)
num0 = gen.b[k0].conj().T @ gen.b[k0]
print(f"{'t':>5} {'closed form':>14} {'master eq.':>14}")
for t, rho in zip(times, rhos):
    closed = dyn.evolve_two_point(model, dyn.QuasiparticleState.diagonal(occ0), t).theta[k0, k0].real
    print(f"{t:5.1f} {closed:14.10f} {oracle.expectation(rho, num0).real:14.10f}")
