"""
Efimov and Thomas towers
========================

Three identical bosons are unstable at every mass ratio: the s-wave symbol
is negative at the origin and vanishes at ``s0 ~ 1.00624``.  At large
hyper-radius the reduced problem looks like an attractive inverse-square
potential of strength ``-(s0^2 + 1/4)``, whose bound states form a
geometric ladder with ratio ``exp(2 pi / s0) ~ 515``.

Here we locate ``s0`` on the channel function, then diagonalize the model
operator with an inner cutoff (levels pile up at zero, the Efimov
direction) and with an outer box (levels run off to minus infinity, the
Thomas direction).
"""

import math

from contactspec import make_channel
from contactspec.spectra import efimov_exponent_uncertainty, efimov_tower, geometric_ratio

cf = make_channel(1.0, 0, "boson", multiplicity=2)
s0, err = efimov_exponent_uncertainty(cf)
print(f"Lambda(0) = {cf(0.0):.6f}")
print(f"s0 = {s0:.8f} +- {err:.1e}, ratio = {geometric_ratio(s0):.3f}")

# %%
# Accumulation at zero
# --------------------
# A hard core at ``r0 = 1`` and a box of radius ``1e6``: the deepest levels
# are set by the core, the shallow ones approach zero geometrically.

expected = math.exp(-2 * math.pi / s0)
towers = (("zero", 1.0, 1e6), ("minus_infinity", 1e-6, 1.0))
for direction, r0, R in towers:
    res = efimov_tower(s0, r0, R)
    print(f"\n{direction}: {len(res.tower)} levels")
    for e in res.tower:
        print(f"   E = {e:.6e}")
    for q in res.last_ratios(direction):
        print(f"   ratio {q:.6e}  ({100 * (q / expected - 1):+.2f}% from exp(-2 pi / s0))")

# %%
# The small offsets from the ideal ratio come from the finite core and box;
# they shrink as the ladder moves away from both walls.
