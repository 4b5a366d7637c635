"""
How the IRS area scales
=======================

Per-element area ``A0 N^-q``: ``q = 0`` keeps the spacing fixed (the aperture
grows with N), ``q = 1`` keeps the aperture fixed. Correlation, and with it
the growth of lambda_max, depends on q. Only covariances and closed-form
statistics are computed here, so it runs in seconds.
"""

import dataclasses
import warnings

from irshard import ScalingModel, check_eigen_conditions, far_field_check, sweep_N
from irshard.experiment import parse_config

base = parse_config(preset="fig2").config
n_values = [64, 144, 256, 400, 576]

for q in (0.0, 0.5, 1.0):
    # every curve starts from half-wavelength spacing at N = 64
    scaling = ScalingModel(0.25 * 64**q, q)
    cfg = dataclasses.replace(base, scaling=scaling)
    recs = sweep_N(cfg, n_values, "exponent", run_mc=False)
    eig = check_eigen_conditions([(r.N, r.lambda_max) for r in recs], scaling)
    print(
        f"q={q:.1f}: spacing {recs[0].spacing_x:.3f} -> {recs[-1].spacing_x:.3f}, "
        f"u_hat={eig.u_hat:.3f}, lambda_max/N decreasing: {eig.lambda_ratio_decreasing}, "
        f"sigma_C^2 at N={n_values[-1]}: {recs[-1].analytic.var_C:.2e}"
    )

##############################################################################
# The far-field model needs the link distances to outgrow D0 N^(gamma/2)
# with gamma > 1 - q. A 50 m link against D0 = 1 m and gamma = 1 (q = 0.5):
for n in (64, 1024, 4096):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        margin = far_field_check(50.0, n, D0=1.0, gamma=1.0, q=0.5)
    print(f"N={n:5d}: far-field margin {margin:.2f}" + ("  (violated)" if caught else ""))
