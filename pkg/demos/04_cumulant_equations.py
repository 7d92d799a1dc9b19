"""Automatic derivation of the second-order moment equations.

The engine adjoint-evolves each stored moment, resolves sums over identical
atoms into polynomial weights in the atom numbers, and closes third-order
expectations.  One derivation per geometry serves every atom number, which
is what makes million-atom scans affordable.
"""

import math

from spinguide import EnsembleLayout, SubEnsemble, WaveguideModel, derive_system, two_ensemble_layout
from spinguide.cumulant import reference_equation_count

model = WaveguideModel()
lam = model.lambda_eff

# two collective spins: the textbook subradiance configuration
layout = two_ensemble_layout(8, 12, spacing=lam, theta=math.pi)
system = derive_system(model, layout)
print(system.render_equations())

# the sampled-position geometries used for coherent-interaction studies
for m_pos in (4, 6):
    subs = tuple(SubEnsemble(10, i * lam / m_pos, pulse_area=math.pi, pumped=True)
                 for i in range(m_pos))
    subs += tuple(SubEnsemble(10, i * lam / m_pos) for i in range(m_pos))
    big = derive_system(model, EnsembleLayout(subs))
    print(f"{2 * m_pos} sub-ensembles: {big.n_equations} stored moments, "
          f"{reference_equation_count(2 * m_pos)} in the conjugate-inclusive convention")
