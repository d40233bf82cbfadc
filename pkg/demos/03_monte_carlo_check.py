"""Monte Carlo cross-checks of the jump-process simulator.

1. Mean exit time of the unit disc from its centre for α = 1/2, which has
   the closed form 2/π.
2. Mean capture time of an ε = 0.1 ball on T² from a uniform start,
   compared with the spectral solve.
"""

from levylab import constants as K
from levylab import levy_sim as LS
from levylab import manifold as MF
from levylab import spectral_torus as T

cfg = LS.JumpProcessConfig(0.5, 1e-3, MF.euclidean(2), seed=11)
est = LS.estimate_capture(cfg, [0.0, 0.0], [0.0, 0.0], 1.0, 20_000)
exact = K.getoor_ball_mean_exit(2, 0.5, [0.0, 0.0])
print(f"disc exit: MC {est.mean:.4f} +/- {est.half_width_95:.4f}, exact {exact:.4f}")

cfg = LS.JumpProcessConfig(0.5, 1e-3, MF.torus(2), seed=7)
est = LS.estimate_capture(cfg, "uniform", [0.5, 0.5], 0.1, 10_000)
sol = T.solve_capture(T.TorusGrid(2, 512), 0.5, 0.1)
print(f"torus capture: MC {est.mean:.4f} +/- {est.half_width_95:.4f}, spectral {sol.mean_u:.4f}")
print(f"censored fraction {est.n_censored / est.n_samples:.2%}")
