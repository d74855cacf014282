"""The full coupled run: per-step fixed-point decoupling in action.

Each time step freezes the quasilinear coefficients at the current iterate
(alpha = 1 - 2 k(theta) p, r = h(theta), g = 2 k(theta) p_t^2), solves the
two linear sub-problems, and repeats to convergence.  Two things make the
canonical small-data run work, and both are visible in the printed
diagnostics:

  * the pressure data is small enough that alpha keeps a comfortable
    positive margin (the temperature amplitude is deliberately NOT small -
    the margin only concerns the pressure);
  * the per-step map is a strong contraction, so a couple of iterations
    reach a 1e-10 tolerance.
"""

from thermoacoustic.coupling import simulate
from thermoacoustic.verification import canonical_config, contraction_metrics

config = canonical_config()
result = simulate(config)
alpha_min, max_iters, worst_ratio = contraction_metrics(result)

print(f"{'t':>6} {'E_tau':>12} {'acoustic E':>12} {'alpha_min':>10} {'iters':>6}")
for report in result.reports[::10]:
    print(
        f"{report.t:6.2f} {report.E_tau:12.4e} {report.acE_total:12.4e} "
        f"{report.alpha_min:10.6f} {report.picard_iters:6d}"
    )

print(f"\nrun of {len(result.picard_iters_per_step)} steps:")
print(f"  minimum alpha over the run:            {alpha_min:.6f}")
print(f"  maximum Picard iterations per step:    {max_iters}")
print(f"  worst successive-difference ratio:     {worst_ratio:.2e}")
xp, xtheta, xq = result.x_norms
print(f"  solution-space norms: |p|={xp:.3f}, |theta|={xtheta:.3f}, |q|={xq:.3f}")
print("\nevery accepted step also satisfies the nonlinear system with the")
print("coefficients re-evaluated at the accepted state (see the test suite).")
