"""Dicke-triangle populations of pumped-plus-ground initial states.

Collective decay only lowers M at fixed J, so everything that starts at
(J, M) releases exactly M + J photons before going dark.  A pi pulse puts
all population in one M column; weaker pulses spread over several columns
and can, counterintuitively, lose more excitation overall.
"""

import math

from spinguide import (
    decompose_initial_state,
    predicted_lost_excitation,
    saturation_limit,
    two_ensemble_layout,
    WaveguideModel,
)

lam = WaveguideModel().lambda_eff

for theta, label in ((math.pi, "pi pulse"), (2 * math.pi / 3, "2/3 pi pulse")):
    layout = two_ensemble_layout(8, 12, spacing=lam, theta=theta)
    dist = decompose_initial_state(layout)
    print(f"\n{label}, N = 20, N_p = 8:")
    print("  J      M      P")
    for J, M, p in dist.rows():
        if p > 1e-3:
            print(f"  {J:4.1f}  {M:5.1f}  {p:.4f}")
    print(f"  predicted lost excitation: {predicted_lost_excitation(dist):.4f}")

print("\nlarge-N saturation of the pi-pulse loss at N_p/N = 0.4:")
for n in (50, 200, 1000):
    layout = two_ensemble_layout(int(0.4 * n), n - int(0.4 * n), spacing=lam, theta=math.pi)
    lost = predicted_lost_excitation(decompose_initial_state(layout))
    print(f"  N = {n:5d}: {lost:.4f}")
print(f"  limit N_p/(N_np - N_p) = {saturation_limit(4, 6)}")
