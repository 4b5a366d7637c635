"""
Channel hardening with the IRS size
===================================

Grow a square IRS at fixed half-wavelength spacing and watch the capacity
variance shrink. A smaller sample budget than the full experiment keeps this
quick; pass ``SAMPLES = 100_000`` for the full-size run.
"""

from irshard import ScalingModel, check_eigen_conditions, hardening_fit, sweep_N
from irshard.experiment import FIG2_GRID, parse_config

SAMPLES = 20_000

spec = parse_config(preset="fig2", overrides={"samples": SAMPLES, "workers": 4})
records = sweep_N(spec.config, FIG2_GRID, "fixed-spacing")

print(f"{'N':>5} {'lambda_max':>10} {'var analytic':>13} {'var MC':>10}")
for r in records:
    print(f"{r.N:5d} {r.lambda_max:10.4f} {r.analytic.var_C:13.6f} {r.empirical.variance:10.6f}")

##############################################################################
# lambda_max grows sub-linearly, and the variance decays roughly as 1/N,
# faster than the N^(u-1) envelope allows.
area = spec.config.irs_geometry.element_area
eig = check_eigen_conditions([(r.N, r.lambda_max) for r in records], ScalingModel(area, 0.0))
fit = hardening_fit(
    [(r.N, r.empirical.variance) for r in records], eig.u_hat, 0.0,
    mu_values=[r.empirical.mean for r in records],
)
print(f"lambda_max ~ N^{eig.u_hat:.3f}   var_C ~ N^{fit.decay_slope:.3f}   (envelope N^{eig.u_hat - 1:.3f})")
print(f"mu_C >= {fit.b_hat:.2f} + log2 N on this grid; var_C <= {fit.c_hat:.3f} N^(u-1)")
