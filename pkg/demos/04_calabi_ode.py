"""No Calabi-symmetric conical metric on Bl1 P^2 with the (1, 3) moment interval.

Matching the profile Y at both ends of [a, b] forces
g(alpha) = (b alpha - 1) e^{(b - a) alpha} + 1 - a alpha = 0. Since g(0) = g'(0) = 0
and g'' is a positive exponential polynomial, g has no zero on (0, 1].
"""

import numpy as np

from conical_toric.special_solutions import calabi_coefficients, calabi_constraint, nonexistence_certificate

cert = nonexistence_certificate(1, 3)
print(cert.summary())
print(f"g(1/3) = {calabi_constraint(1 / 3):.6f}")

print("\n alpha   |Y(3)| with Y(1) = 0")
for alpha in np.linspace(0, 1, 6):
    res = calabi_coefficients(alpha)
    print(f"  {alpha:.1f}    {res.defect:.4e}")

for a, b in ((1, 2), (1, 5), (2, 3)):
    print(f"(a, b) = ({a}, {b}): {nonexistence_certificate(a, b).d2g} > 0")
