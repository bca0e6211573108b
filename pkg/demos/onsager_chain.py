"""Thermoelectric response of a tight-binding chain.

Prints the Onsager matrix at a few reference points, its asymmetry, and the
finite-difference estimate from small chemical-potential and temperature
biases. The diagonal coefficients stay non-negative and l12 equals l21.
"""
import numpy as np

from quadlind import Bath, CouplingRegion, OhmicDensity, build_effective_model, tight_binding_chain
from quadlind.transport import LinearResponsePoint, onsager_finite_difference, onsager_matrix

N = 8
h = tight_binding_chain(N, 1.0, 2.0)
baths = [
    Bath(1.0, 0.0, OhmicDensity(0.05, 6.0), CouplingRegion((0,))),
    Bath(1.0, 0.0, OhmicDensity(0.05, 6.0), CouplingRegion((N - 1,))),
]
model = build_effective_model(h, baths)
for mu, T in [(1.0, 0.3), (2.0, 0.5), (2.5, 1.5)]:
    point = LinearResponsePoint(mu, T)
    res = onsager_matrix(model, point)
    fd = onsager_finite_difference(model, point)
    print(f"mu={mu} T={T}  asymmetry {res.asymmetry:.1e}  "
          f"max |analytic - finite difference| {np.max(np.abs(res.L - fd)):.1e}")
    print(np.array2string(res.L, precision=6))
