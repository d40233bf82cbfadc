"""Normalising constants of the 2α-stable generator and the capture prefactor.

Prints C(n, α), the ball-inverse constant c_α, the weight integral W(n, α)
and the leading capture constant c(n, α), then checks the identity
c_α · W(n, α) · c(n, α) = C(n, -α) that ties them together.
"""

import numpy as np

from levylab import constants as K

print(f"{'n':>2} {'alpha':>5} {'C(n,a)':>10} {'c_alpha':>10} {'W(n,a)':>10} {'c(n,a)':>10} {'residual':>9}")
for n in (2, 3):
    for a in (0.25, 0.5, 0.75):
        print(
            f"{n:>2} {a:>5} {K.levy_constant(n, a):10.6f} {K.ball_inverse_constant(n, a):10.6f} "
            f"{K.weight_integral(n, a):10.6f} {K.capture_constant(n, a):10.6f} {K.identity_residual(n, a):9.1e}"
        )

# the n = 2 capture constant is 4^{-α}(1-α)Γ(1-α)²/π; at α = 1/2 this is exactly 1/4
print("\nc(2, 1/2) =", K.capture_constant(2, 0.5))

# the error term decays like ε|log ε| at α = 1/2 in two dimensions
for eps in np.geomspace(0.1, 1e-4, 4):
    print(f"eps={eps:.0e}  error_term={K.error_term(2, 0.5, eps):.3e}")
