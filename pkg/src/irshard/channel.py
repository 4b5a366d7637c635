"""IRS-aided MISO channel: spatial correlation, LoS components and fading draws.

The transmitter reaches the receiver over a blocked (Rayleigh) direct link and
over a cascade transmitter -> IRS (pure LoS) -> receiver (Rician with spatially
correlated NLoS part).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalError
from .geometry import ArrayGeometry, Direction, array_response

__all__ = [
    "SystemParams",
    "CovarianceMatrix",
    "ChannelRealization",
    "rician_weights",
    "build_sinc_covariance",
    "build_los_T",
    "build_los_h_bar",
    "complex_normal",
    "sample_direct",
    "sample_reflect",
    "shape_reflect",
]

# pre-repair eigenvalues below -NEG_EIG_TOL * lambda_max mean the kernel is not PSD
NEG_EIG_TOL = 1e-8


@dataclass(frozen=True)
class SystemParams:
    """Large-scale link parameters.

    ``alpha_*`` are path losses, ``kappa_r`` the Rician factor of the
    IRS -> receiver link (``math.inf`` gives a pure LoS link) and ``rho`` the
    transmit power. The receiver noise variance is fixed to one.
    """

    alpha_d: float
    alpha_s: float
    alpha_r: float
    kappa_r: float
    rho: float
    area_tx_element: float
    area_irs_element: float
    aoa_irs: Direction
    aod_irs: Direction
    aod_tx: Direction
    noise_variance: float = field(default=1.0, init=False)

    def __post_init__(self):
        for name in ("alpha_d", "alpha_s", "alpha_r", "rho", "area_tx_element", "area_irs_element"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be finite and nonnegative, got {value}")
        if not self.kappa_r >= 0:
            raise DomainError(f"kappa_r must be nonnegative, got {self.kappa_r}")


def rician_weights(kappa: float) -> tuple[float, float]:
    """Power weights ``(kappa/(kappa+1), 1/(kappa+1))`` of the LoS and NLoS parts."""
    if math.isinf(kappa):
        return 1.0, 0.0
    return kappa / (kappa + 1.0), 1.0 / (kappa + 1.0)


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Real symmetric PSD correlation matrix with its eigendecomposition.

    ``eigenvalues`` are sorted in descending order and already repaired
    (clipped at zero); ``min_eigenvalue_raw`` and ``trace_deviation`` keep
    the diagnostics of that repair.
    """

    entries: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    min_eigenvalue_raw: float = 0.0
    clipped: int = 0
    trace_deviation: float = 0.0

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def factor(self) -> np.ndarray:
        """Square-root factor ``L = V diag(sqrt(w))`` with ``L L^T = R``."""
        return self.eigenvectors * np.sqrt(self.eigenvalues)

    @classmethod
    def from_matrix(cls, entries) -> "CovarianceMatrix":
        """Eigendecompose a symmetric correlation matrix and repair rounding negatives."""
        entries = np.array(entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DomainError(f"covariance must be square, got shape {entries.shape}")
        if not np.allclose(entries, entries.T, rtol=0, atol=1e-12):
            raise DomainError("covariance must be symmetric")
        try:
            w, v = np.linalg.eigh(entries)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"eigendecomposition failed: {exc}") from exc
        w, v = w[::-1], v[:, ::-1]
        lam_max = w[0]
        if lam_max <= 0:
            raise NumericalError("covariance has no positive eigenvalue")
        w_min = float(w[-1])
        if w_min < -NEG_EIG_TOL * lam_max:
            raise NumericalError(
                f"covariance is not PSD: eigenvalue {w_min:.3e} below tolerance "
                f"{-NEG_EIG_TOL * lam_max:.3e}"
            )
        clipped = int(np.count_nonzero(w < 0))
        w = np.clip(w, 0.0, None)
        trace_dev = float(w.sum() - np.trace(entries))
        return cls(entries, w, v, w_min, clipped, trace_dev)


@dataclass
class ChannelRealization:
    """One channel draw. ``h`` is filled once phases are applied."""

    h_d: np.ndarray
    T: np.ndarray
    h_bar_r: np.ndarray
    h_tilde_r: np.ndarray
    h_r: np.ndarray
    h: np.ndarray | None = None


def build_sinc_covariance(irs_geometry: ArrayGeometry) -> CovarianceMatrix:
    """Isotropic-scattering correlation of the IRS elements.

    Entry ``(n, n')`` is ``sinc(2 r / wavelength)`` where ``r`` is the
    distance between the two elements and ``sinc(x) = sin(pi x)/(pi x)``.
    Neighbours half a wavelength apart are therefore uncorrelated.
    """
    g = irs_geometry
    i, j = g.grid_indices()
    dist = np.hypot(g.dx * (i[:, None] - i[None, :]), g.dy * (j[:, None] - j[None, :]))
    entries = np.sinc(2.0 / g.wavelength * dist)
    return CovarianceMatrix.from_matrix(entries)


def build_los_T(params: SystemParams, tx_geometry: ArrayGeometry, irs_geometry: ArrayGeometry) -> np.ndarray:
    """Rank-one LoS channel from transmitter to IRS, shape ``(N, M)``."""
    a_irs = array_response(params.aoa_irs, irs_geometry)
    a_tx = array_response(params.aod_tx, tx_geometry)
    return math.sqrt(params.alpha_s * params.area_irs_element) * np.outer(a_irs, a_tx.conj())


def build_los_h_bar(irs_geometry: ArrayGeometry, aod_irs: Direction) -> np.ndarray:
    return array_response(aod_irs, irs_geometry)


def complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    """Circularly-symmetric CN(0, 1) draws: real and imaginary parts N(0, 1/2)."""
    if isinstance(size, int):
        size = (size,)
    z = rng.standard_normal((*size, 2))
    return (z[..., 0] + 1j * z[..., 1]) * math.sqrt(0.5)


def sample_direct(params: SystemParams, tx_geometry: ArrayGeometry, rng, size=None) -> np.ndarray:
    """Rayleigh direct channel, shape ``(M,)`` or ``(size, M)``."""
    shape = (tx_geometry.total,) if size is None else (size, tx_geometry.total)
    return math.sqrt(params.alpha_d * params.area_tx_element) * complex_normal(rng, shape)


def shape_reflect(params: SystemParams, cov: CovarianceMatrix, h_bar_r: np.ndarray, g: np.ndarray):
    """Map white CN(0, 1) draws ``g`` (last axis N) to ``(h_tilde_r, h_r)``.

    Works row-wise on a batch, so ``g`` may be ``(N,)`` or ``(S, N)``.
    """
    n = cov.dim
    if h_bar_r.shape != (n,) or g.shape[-1] != n:
        raise DomainError(
            f"dimension mismatch: covariance {n}, h_bar_r {h_bar_r.shape}, draws {g.shape}"
        )
    h_tilde = g @ cov.factor.T
    los_w, nlos_w = rician_weights(params.kappa_r)
    scale = math.sqrt(params.alpha_r * params.area_irs_element)
    h_r = scale * (math.sqrt(los_w) * h_bar_r + math.sqrt(nlos_w) * h_tilde)
    return h_tilde, h_r


def sample_reflect(params: SystemParams, cov: CovarianceMatrix, h_bar_r: np.ndarray, rng, size=None):
    """Draw the correlated NLoS vector and the Rician IRS -> receiver channel."""
    shape = (cov.dim,) if size is None else (size, cov.dim)
    return shape_reflect(params, cov, np.asarray(h_bar_r), complex_normal(rng, shape))
