"""Coherent exchange effects for uniformly distributed atoms.

Atoms in a real cloud sample all positions along the guide, so the coherent
exchange no longer vanishes.  Sampling four lambda/4-spaced sites per group
captures the effect: full inversion barely notices, a partial coherent pulse
is badly degraded, and splitting the pumped group into opposite pulse phases
(zero net coherence, as in a large cloud) restores the transfer.
"""

import math

from spinguide.experiments import position_sampled_run

n, n_pumped = 10000, 8000  # E = 0.8, above threshold

_, full, _ = position_sampled_run(n, math.pi, n_pumped, n_positions=4, t_end_factor=300.0)
_, part, _ = position_sampled_run(n, 2 * math.pi / 3, n_pumped, n_positions=4,
                                  t_end_factor=300.0)
_, split, _ = position_sampled_run(n, 2 * math.pi / 3, n_pumped, n_positions=4,
                                   split_phase=True, t_end_factor=300.0)
_, zero, _ = position_sampled_run(n, 2 * math.pi / 3, n_pumped, n_positions=4,
                                  zero_omega=True, t_end_factor=300.0)

print("final non-pumped population at N = 10^4, four sampled positions:")
print(f"  pi pulse, coherent exchange on:        {full['ee_np'][-1]:.4f}")
print(f"  2/3 pi pulse, coherent exchange on:    {part['ee_np'][-1]:.4f}   <- degraded")
print(f"  2/3 pi pulse, opposite-phase halves:   {split['ee_np'][-1]:.4f}   <- recovered")
print(f"  2/3 pi pulse, exchange zeroed (check): {zero['ee_np'][-1]:.4f}")

print("\ntime evolution of the split-phase run:")
for k in range(0, len(split["t"]), len(split["t"]) // 8):
    print(f"  t = {split['t'][k]:.5f}:  ee_p = {split['ee_p'][k]:.4f}  "
          f"ee_np = {split['ee_np'][k]:.4f}")
