"""Waveguide coupling kernels and the two-channel structure of collective decay.

The guided mode couples every emitter pair through sin/cos of their phase
separation.  Because cos(k(x_i - x_j)) is a Gram matrix of the 2-vectors
(cos k x, sin k x), the decay matrix always has rank <= 2: two collective
jump operators (the cosine and sine quadratures) carry all dissipation, no
matter how many sub-ensembles there are.
"""

import numpy as np

from spinguide import (
    EnsembleLayout,
    SubEnsemble,
    WaveguideModel,
    build_matrices,
    jump_operator_weights,
)

model = WaveguideModel()  # gamma1d = 1 sets the rate unit, lambda_eff = 1
lam = model.lambda_eff

print("pairwise kernels at reference separations (units of gamma1d):")
for x in (0.0, lam / 4, lam / 2, 3 * lam / 4, lam):
    from spinguide import gamma_ij, omega_ij

    print(f"  x = {x / lam:4.2f} lambda:  omega = {omega_ij(model, 0.0, x):+.3f}   "
          f"gamma = {gamma_ij(model, 0.0, x):+.3f}")

# four sub-ensembles spread over one wavelength
layout = EnsembleLayout(tuple(SubEnsemble(5, i * lam / 4) for i in range(4)))
matrices = build_matrices(model, layout)
print("\ndecay matrix for four lambda/4-spaced sub-ensembles:")
print(np.round(matrices.gamma, 12))
print("eigenvalues:", np.round(np.linalg.eigvalsh(matrices.gamma), 12))

cos_w, sin_w = jump_operator_weights(model, layout)
reconstructed = np.outer(cos_w, cos_w) + np.outer(sin_w, sin_w)
print("\ntwo-channel weights c =", np.round(cos_w, 12), " s =", np.round(sin_w, 12))
print("max |c c^T + s s^T - gamma| =", np.max(np.abs(reconstructed - matrices.gamma)))
