"""How uncorrected local updates bias the limit point.

Two heterogeneous scalar agents share a saddle problem whose true minimax
point is x* = y* = 3.3. Running K uncorrected local descent/ascent steps
between averaging rounds converges fast, but for K >= 2 it converges to the
wrong point: each extra local step pulls agents toward their private saddle
points. This script evaluates the closed-form fixed point, confirms it with a
long simulation, and shows the bias growing with K while the fixed-point
residual stays at zero.

Run: python3 demos/01_scalar_fixed_point_bias.py
"""

import numpy as np

from fedmm import (
    ScalarTwoAgent,
    closed_form_minimax,
    local_sgda_fixed_point_closed_form,
    local_sgda_limit,
    local_sgda_residual,
)

problem = ScalarTwoAgent()
star = closed_form_minimax(problem)
print("true minimax point:", float(star.x[0]))
print()

print("local updates with a constant stepsize land on biased fixed points:")
print(f"{'K':>4} {'eta':>8} {'closed form':>16} {'simulated':>16} "
      f"{'|gap to 3.3|':>14} {'rounds':>7}")
for K in (1, 10, 20, 50):
    eta = 0.1 if K == 1 else 0.001
    closed = local_sgda_fixed_point_closed_form(K, eta, eta)
    limit = local_sgda_limit(problem, K, eta, eta)
    print(f"{K:>4} {eta:>8} {closed.x[0]:>16.10f} {limit.iterate.x[0]:>16.10f} "
          f"{abs(closed.x[0] - 3.3):>14.6e} {limit.rounds:>7}")

print()
print("at the K=10 limit the scheme's own residual vanishes, yet the true")
print("averaged gradient does not -- the limit is self-consistent but wrong:")
limit = local_sgda_limit(problem, 10, 0.001, 0.001)
res = local_sgda_residual(problem, limit.iterate, 10, 0.001, 0.001)
gx, gy = problem.global_grad(limit.iterate)
print(f"  fixed-point residual norm: {np.linalg.norm(res):.3e}")
print(f"  averaged gradient norm:    {np.hypot(gx[0], gy[0]):.3e}")
