"""
Building the IRS-aided channel by hand
======================================

A 2x2 transmit array talks to a single-antenna receiver over a blocked direct
path and over an 8x32 IRS. This walks through the pieces: array responses,
the spatial correlation of the IRS, the LoS components, the co-phasing IRS
configuration and a single capacity draw.
"""

import math

import numpy as np

from irshard import (
    ArrayGeometry,
    Direction,
    SystemParams,
    array_response,
    build_los_h_bar,
    build_los_T,
    build_sinc_covariance,
    capacity,
    compose_end_to_end,
    optimal_phases,
    sample_direct,
    sample_reflect,
)

##############################################################################
# Geometry: half-wavelength spacing on both arrays, unit wavelength.
lam = 1.0
tx = ArrayGeometry(nx=2, ny=2, dx=lam / 2, dy=lam / 2, wavelength=lam)
irs = ArrayGeometry(nx=8, ny=32, dx=lam / 2, dy=lam / 2, wavelength=lam)
area = (lam / 2) ** 2

params = SystemParams(
    alpha_d=1 / area, alpha_s=1 / area, alpha_r=1 / area,
    kappa_r=1.0, rho=1.0,
    area_tx_element=area, area_irs_element=area,
    aoa_irs=Direction(math.pi / 6, math.pi / 3),
    aod_irs=Direction(math.pi / 8, 2 * math.pi / 3),
    aod_tx=Direction(math.pi / 7, math.pi / 5),
)

##############################################################################
# Array responses have unit-modulus entries, so their squared norm is the
# element count.
a = array_response(params.aoa_irs, irs)
print("IRS response: first entries", np.round(a[:3], 3), " |a|^2 =", np.vdot(a, a).real)

##############################################################################
# Spatial correlation. Elements half a wavelength apart along an axis are
# uncorrelated, diagonal neighbours are not, so R is not the identity.
cov = build_sinc_covariance(irs)
print("R[0,1] =", round(cov.entries[0, 1], 12), " R[0,9] =", round(cov.entries[0, 9], 4))
print("lambda_max =", round(cov.lambda_max, 4), " (N =", irs.total, ")")

##############################################################################
# LoS components and the co-phasing configuration. With these phases every
# element of the LoS cascade adds up in phase.
T = build_los_T(params, tx, irs)
h_bar = build_los_h_bar(irs, params.aod_irs)
phases = optimal_phases(irs, params.aoa_irs, params.aod_irs)
coherent = np.sum(phases.weights * h_bar * a)
print("coherent LoS sum:", np.round(coherent, 9))

##############################################################################
# One channel draw and its MRT capacity.
rng = np.random.default_rng(0)
h_d = sample_direct(params, tx, rng)
_, h_r = sample_reflect(params, cov, h_bar, rng)
h = compose_end_to_end(h_d, T, h_r, phases)
print("||h||^2 = %.1f  ->  C = %.3f bits" % (np.vdot(h, h).real, capacity(h, params.rho)))
