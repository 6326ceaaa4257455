"""Two ways to get the potential under a charged plate, and how well they agree."""

# %%
# A 1 m square plate carrying 50 pC/m^2, with the field mill 0.462 m below it.

import numpy as np

from platecharge import (
    CenterlineGeometry,
    ChargedPlate,
    QuadratureSpec,
    World,
    centerline_potential,
    integral_field_axial,
    integral_potential,
    refinement_table,
    solid_angle_field_axial,
)

plate = ChargedPlate(side_a=1.0, sigma=50e-12)
world = World(plate)
z = 0.462

# %%
# The centerline formula is cheap and even in r. The full Coulomb integral
# is the reference it approximates; the two agree at the center and part
# ways as the sensor moves out toward the edge.

print(f"{'r (m)':>6} {'centerline (V)':>15} {'integral (V)':>13}")
for r in np.linspace(-0.5, 0.5, 11):
    v_line = centerline_potential(CenterlineGeometry(z, r), plate)
    v_int = integral_potential(plate.centerline_point(r, z), world)
    print(f"{r:6.2f} {v_line:15.5f} {v_int:13.5f}")

# %%
# The axial field has a closed form through the solid angle the plate subtends,
# which makes it a clean check on the quadrature. Errors should drop fourfold
# per grid doubling.

print(f"closed form E = {solid_angle_field_axial(z, plate):.6f} V/m")
for step in refinement_table(lambda q: integral_field_axial(z, plate, q), n0=16, levels=6):
    print(f"n={step.n:4d}  E={step.value:.9f}  change={step.change:.2e}  order={step.order:.3f}")

# %%
# The default grid (256 with a 512 check) reproduces the closed form to about 1e-6.

e_quad = integral_field_axial(z, plate, QuadratureSpec())
print(f"relative error at n=256: {abs(e_quad / solid_angle_field_axial(z, plate) - 1):.2e}")
