"""Large-N Gaussian approximation of the capacity and hardening diagnostics.

For large IRS sizes the MRT capacity is approximately Gaussian with mean
``log2(1 + rho M mu)`` and a standard deviation driven by the Rician
cascade gain and the quadratic form ``h_bar^H R h_bar``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .channel import CovarianceMatrix, SystemParams, rician_weights
from .errors import ConfigError, DomainError, NumericalError

__all__ = [
    "LOG2E",
    "ScalingModel",
    "CapacityStatistics",
    "HardeningDiagnostics",
    "alpha_bar",
    "quadratic_form",
    "analytic_moments",
    "analytic_capacity_stats",
    "check_eigen_conditions",
    "hardening_fit",
    "far_field_check",
]

LOG2E = 1.0 / math.log(2.0)

# slack on the fitted variance decay slope relative to u - 1
SLOPE_SLACK = 0.1


@dataclass(frozen=True)
class ScalingModel:
    """Per-element area ``A0 N^-q``; total aperture ``A0 N^(1-q)``."""

    A0: float
    q: float

    def __post_init__(self):
        if not self.A0 > 0:
            raise DomainError(f"A0 must be positive, got {self.A0}")
        if not 0 <= self.q <= 1:
            raise DomainError(f"q must lie in [0, 1], got {self.q}")

    def element_area(self, n: int) -> float:
        return self.A0 * n ** (-self.q)

    def total_area(self, n: int) -> float:
        return self.A0 * n ** (1 - self.q)

    def spacing(self, n: int) -> float:
        """Side of a square element, used as spacing on both axes."""
        return math.sqrt(self.A0) * n ** (-self.q / 2)


@dataclass(frozen=True)
class CapacityStatistics:
    mu_C: float
    sigma_C: float
    mu: float
    eta: float
    omega: float
    alpha_bar_N: float

    @property
    def var_C(self) -> float:
        return self.sigma_C**2


@dataclass
class HardeningDiagnostics:
    """Fitted growth/decay exponents and bound constants.

    Every fit keeps its R^2 and residuals so a poor fit is visible to the
    caller. Fields that a given check does not compute stay ``None``.
    """

    u_hat: float | None = None
    u_r2: float | None = None
    lambda_ratio_decreasing: bool | None = None
    inverse_aperture_decreasing: bool | None = None
    decay_slope: float | None = None
    decay_r2: float | None = None
    b_hat: float | None = None
    c_hat: float | None = None
    far_field_margin: float | None = None
    passed: bool | None = None
    residuals: list[float] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def alpha_bar(params: SystemParams, area_irs_element: float | None = None) -> float:
    """Normalized NLoS cascade gain ``alpha_r alpha_s A_N^2 / (1 + kappa_r)``."""
    a_n = params.area_irs_element if area_irs_element is None else area_irs_element
    return params.alpha_r * params.alpha_s * a_n**2 * rician_weights(params.kappa_r)[1]


def quadratic_form(cov: CovarianceMatrix, h_bar_r) -> float:
    """``h_bar^H R h_bar``; raises if the imaginary part is not negligible."""
    h_bar_r = np.asarray(h_bar_r)
    if h_bar_r.shape != (cov.dim,):
        raise DomainError(f"h_bar_r has shape {h_bar_r.shape}, expected ({cov.dim},)")
    val = np.vdot(h_bar_r, cov.entries @ h_bar_r)
    if abs(val.imag) > 1e-9 * max(abs(val.real), 1.0):
        raise NumericalError(f"quadratic form is not real: {val}")
    return float(val.real)


def analytic_moments(params: SystemParams, N: int, M: int, cov: CovarianceMatrix, h_bar_r):
    """Return ``(mu, eta, omega)`` of the large-N approximation."""
    if cov.dim != N:
        raise DomainError(f"covariance dimension {cov.dim} != N={N}")
    qf = quadratic_form(cov, h_bar_r)
    a_n = params.area_irs_element
    los_w, nlos_w = rician_weights(params.kappa_r)
    nlos_gain = params.alpha_r * params.alpha_s * a_n**2 * nlos_w
    # kappa * alpha_bar, finite for kappa = inf
    los_gain = params.alpha_r * params.alpha_s * a_n**2 * los_w * N**2
    direct = params.alpha_d * params.area_tx_element
    mu = direct + los_gain + nlos_gain * qf
    eta = direct / M + nlos_gain * qf
    omega = 2 * los_gain + nlos_gain * qf
    return mu, eta, omega


def analytic_capacity_stats(params: SystemParams, N: int, M: int, cov: CovarianceMatrix, h_bar_r) -> CapacityStatistics:
    mu, eta, omega = analytic_moments(params, N, M, cov, h_bar_r)
    rho = params.rho
    snr = 1 + rho * M * mu
    direct = params.alpha_d * params.area_tx_element
    mu_C = math.log2(snr)
    sigma_C = rho * M * LOG2E / snr * math.sqrt(omega * eta + eta + (M - 1) / M * direct)
    return CapacityStatistics(mu_C, sigma_C, mu, eta, omega, alpha_bar(params))


def _loglog_fit(n, y):
    """OLS fit ``log y = c + s log n``; returns slope, intercept, R^2, residuals."""
    x = np.log(np.asarray(n, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    A = np.column_stack([np.ones_like(x), x])
    (c, s), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (c + s * x)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(s), float(c), r2, resid.tolist()


def _check_sweep(ns, what):
    if len(ns) < 4:
        raise DomainError(f"{what} needs at least 4 points, got {len(ns)}")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise DomainError(f"{what} requires strictly increasing N")


def check_eigen_conditions(cov_sequence, scaling: ScalingModel) -> HardeningDiagnostics:
    """Fit ``lambda_max ~ a N^u`` and check the two sub-linear growth conditions.

    ``cov_sequence`` is a list of ``(N, lambda_max)`` pairs. The conditions are
    checked as trends: ``lambda_max / N`` and ``1 / (lambda_max A_IRS)`` must
    both be strictly decreasing over the sequence.
    """
    ns = [int(n) for n, _ in cov_sequence]
    lam = np.array([float(v) for _, v in cov_sequence])
    _check_sweep(ns, "eigenvalue check")
    if np.any(lam <= 0):
        raise DomainError("lambda_max must be positive")
    u, _, r2, resid = _loglog_fit(ns, lam)
    ratio = lam / np.array(ns, dtype=float)
    inv_ap = 1.0 / (lam * np.array([scaling.total_area(n) for n in ns]))
    return HardeningDiagnostics(
        u_hat=u,
        u_r2=r2,
        lambda_ratio_decreasing=bool(np.all(np.diff(ratio) < 0)),
        inverse_aperture_decreasing=bool(np.all(np.diff(inv_ap) < 0)),
        residuals=resid,
    )


def hardening_fit(sweep, u_hat: float, q: float, mu_values=None) -> HardeningDiagnostics:
    """Fit the decay of the capacity variance against N.

    ``sweep`` holds ``(N, var_C)`` pairs. The check passes when the fitted
    log-log slope is at most ``u_hat - 1 + 0.1``. ``c_hat`` is the smallest
    constant with ``var_C <= c N^(u_hat - 1)`` at every point and, when the
    capacity means are supplied, ``b_hat`` the largest constant with
    ``mu_C >= b + (1 - q) log2 N``.
    """
    ns = [int(n) for n, _ in sweep]
    var = np.array([float(v) for _, v in sweep])
    _check_sweep(ns, "hardening fit")
    if np.any(var <= 0):
        raise DomainError("variances must be positive for a log-log fit")
    slope, _, r2, resid = _loglog_fit(ns, var)
    n_arr = np.array(ns, dtype=float)
    c_hat = float(np.max(var * n_arr ** (1 - u_hat)))
    b_hat = None
    if mu_values is not None:
        b_hat = float(np.min(np.asarray(mu_values, dtype=float) - (1 - q) * np.log2(n_arr)))
    return HardeningDiagnostics(
        u_hat=u_hat,
        decay_slope=slope,
        decay_r2=r2,
        b_hat=b_hat,
        c_hat=c_hat,
        passed=bool(slope <= (u_hat - 1) + SLOPE_SLACK),
        residuals=resid,
    )


def far_field_check(distance: float, N: int, D0: float, gamma: float, q: float = 0.0) -> float:
    """Ratio of ``distance`` to the far-field floor ``D0 N^(gamma/2)``.

    Warns when the ratio is below one. ``gamma`` must exceed ``1 - q``.
    """
    if not D0 > 0:
        raise ConfigError(f"D0 must be positive, got {D0}")
    if not gamma > 1 - q:
        raise ConfigError(f"gamma={gamma} must exceed 1 - q = {1 - q}")
    margin = distance / (D0 * N ** (gamma / 2))
    if margin < 1:
        warnings.warn(f"far-field assumption violated at N={N}: margin {margin:.3g}", stacklevel=2)
    return margin
