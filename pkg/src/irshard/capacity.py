"""IRS phase configuration, end-to-end channel and MRT capacity."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import ArrayGeometry, Direction, exponents

__all__ = ["PhaseProfile", "optimal_phases", "compose_end_to_end", "capacity"]


@dataclass(frozen=True, eq=False)
class PhaseProfile:
    """Per-element IRS phase shifts in radians, kept unwrapped."""

    beta: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.beta)):
            raise DomainError("phase shifts must be finite")

    @property
    def weights(self) -> np.ndarray:
        """Reflection coefficients ``exp(-j beta)``."""
        return np.exp(-1j * self.beta)


def optimal_phases(irs_geometry: ArrayGeometry, aoa_irs: Direction, aod_irs: Direction) -> PhaseProfile:
    """Phases that co-phase the LoS cascade transmitter -> IRS -> receiver.

    With these phases every term ``exp(-j beta_n) a_n(aod) a_n(aoa)`` equals one.
    """
    k = 2 * np.pi / irs_geometry.wavelength
    return PhaseProfile(k * (exponents(aoa_irs, irs_geometry) + exponents(aod_irs, irs_geometry)))


def compose_end_to_end(h_d, T, h_r, phases: PhaseProfile) -> np.ndarray:
    """End-to-end channel ``h_m = h_d,m + sum_n exp(-j beta_n) h_r,n t_nm``.

    ``h_d`` and ``h_r`` may carry a leading batch axis; ``T`` is shared.
    """
    h_d, T, h_r = np.asarray(h_d), np.asarray(T), np.asarray(h_r)
    n, m = T.shape
    if h_d.shape[-1] != m or h_r.shape[-1] != n or phases.beta.shape != (n,):
        raise DomainError(
            f"dimension mismatch: T {T.shape}, h_d {h_d.shape}, h_r {h_r.shape}, "
            f"beta {phases.beta.shape}"
        )
    return h_d + (h_r * phases.weights) @ T


def capacity(h, rho: float):
    """MRT capacity ``log2(1 + rho ||h||^2)`` in bits; batched over leading axes."""
    if not rho >= 0:
        raise DomainError(f"transmit power must be nonnegative, got {rho}")
    h = np.asarray(h)
    gain = np.einsum("...i,...i->...", h.real, h.real) + np.einsum("...i,...i->...", h.imag, h.imag)
    out = np.log1p(rho * gain) / math.log(2)
    return float(out) if out.ndim == 0 else out
