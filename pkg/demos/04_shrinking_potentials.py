"""
Shrinking potentials in the two-body sector
===========================================

A regular potential ``V`` can be squeezed toward a contact interaction in
two ways:

* ``eps^-3 V(r / eps)`` keeps the ``L1`` norm fixed.  In unit variables the
  well deepens like ``1/eps``, so bound states appear without limit and
  the ground energy diverges like ``eps^-2``.
* ``eps^-2 V(r / eps)`` is a pure change of length scale.  The scattering
  length shrinks like ``eps``, unless ``V`` sits on a zero-energy
  resonance, where it stays infinite: that is the point interaction.
"""

import math

import numpy as np

from contactspec.epsilon_lab import (
    RadialPotential,
    ScaledPotential,
    birman_schwinger_eigs,
    bound_states,
    l1_norm,
    resonance_tune,
    scattering_length,
    shape_independence_probe,
)

# %%
# The L1-preserving scaling
# -------------------------

V = RadialPotential("square_well", 2.0)
print(f"||V||_1 = {l1_norm(V):.10f}")
for eps in (1.0, 0.5, 0.2, 0.1, 0.05):
    W = ScaledPotential(V, eps, "contact_3")
    levels = bound_states(W)
    ground = f"{levels[0]:.4e}" if levels else "none"
    print(f"eps = {eps:5.2f}   ||V_eps||_1 = {l1_norm(W):.10f}   a = {scattering_length(W):+.5f}"
          f"   bound states {len(levels)}   ground {ground}")

# %%
# Zero-energy resonances
# ----------------------
# The first resonance of a unit square well sits at depth ``pi^2/4``.  At
# that depth the Birman-Schwinger operator has eigenvalue 1 at threshold.

for profile in ("square_well", "gaussian", "exponential"):
    d = resonance_tune(profile)
    bs = birman_schwinger_eigs(RadialPotential(profile, d), 1e-8)[0]
    print(f"{profile:12s} resonance depth {d:.10f}   BS eigenvalue {bs:.6f}")
print(f"pi^2 / 4 = {math.pi**2 / 4:.10f}")

# %%
# Shape dependence at finite eps
# ------------------------------
# Two wells with the same ``L1`` norm have different scattering lengths,
# and both cross resonances as ``eps`` decreases.

Va = RadialPotential("square_well", 3.0)
Vb = RadialPotential("gaussian", l1_norm(Va) / math.pi**1.5)
for row in shape_independence_probe(Va, Vb, [1.0, 0.5, 0.25]):
    print(f"eps = {row['eps']:4.2f}  {row['profile']:12s}  a = {row['scattering_length']:+9.5f}"
          f"  BS max = {row['bs_max']:.4f}  bound = {row['bound_states']}")

# %%
# The point scaling leaves ``a / eps`` unchanged.

U = RadialPotential("gaussian", 1.7)
print(np.array([scattering_length(ScaledPotential(U, e, "point_2")) / e for e in (1.0, 0.5, 0.25, 0.125)]))
