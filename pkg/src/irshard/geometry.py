"""Uniform planar arrays: index maps, phase exponents and array responses.

Element indices are 1-based at the public boundary, matching the usual
``m = 1..M`` / ``n = 1..N`` labelling. Angles are in radians.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "ArrayGeometry",
    "Direction",
    "index_maps",
    "exponent",
    "exponents",
    "array_response",
]


@dataclass(frozen=True)
class Direction:
    """Plane-wave direction given by azimuth and elevation (radians)."""

    azimuth: float
    elevation: float

    def __post_init__(self):
        if not (math.isfinite(self.azimuth) and math.isfinite(self.elevation)):
            raise DomainError(f"non-finite direction {self!r}")


@dataclass(frozen=True)
class ArrayGeometry:
    """Rectangular uniform planar array.

    Parameters
    ----------
    nx, ny : int
        Horizontal and vertical element counts.
    dx, dy : float
        Horizontal and vertical element spacing in meters.
    wavelength : float
        Carrier wavelength in meters.

    Spacings above half a wavelength are allowed but trigger a warning.
    """

    nx: int
    ny: int
    dx: float
    dy: float
    wavelength: float

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny or self.nx < 1 or self.ny < 1:
            raise DomainError(f"element counts must be positive integers, got {self.nx}x{self.ny}")
        if not (self.dx > 0 and self.dy > 0 and self.wavelength > 0):
            raise DomainError("spacings and wavelength must be positive")
        half = self.wavelength / 2
        # tolerate rounding from spacing = wavelength / 2 computed elsewhere
        if self.dx > half * (1 + 1e-12) or self.dy > half * (1 + 1e-12):
            warnings.warn(
                f"element spacing ({self.dx:g}, {self.dy:g}) exceeds half a wavelength ({half:g})",
                stacklevel=3,
            )

    @property
    def total(self) -> int:
        return self.nx * self.ny

    @property
    def element_area(self) -> float:
        return self.dx * self.dy

    @classmethod
    def square(cls, n: int, spacing: float, wavelength: float) -> "ArrayGeometry":
        """Square array with ``n`` elements; ``n`` must be a perfect square."""
        side = math.isqrt(n)
        if side * side != n:
            raise DomainError(f"N={n} is not a perfect square")
        return cls(side, side, spacing, spacing, wavelength)

    def grid_indices(self) -> tuple[np.ndarray, np.ndarray]:
        """Horizontal and vertical grid indices of all elements, in element order."""
        k = np.arange(self.total)
        return k % self.nx, k // self.nx


def index_maps(k: int, geometry: ArrayGeometry) -> tuple[int, int]:
    """Grid position ``(i, j)`` of 1-based element ``k``.

    >>> index_maps(9, ArrayGeometry(8, 4, 0.5, 0.5, 1.0))
    (0, 1)
    """
    if int(k) != k or not 1 <= k <= geometry.total:
        raise DomainError(f"element index {k} outside 1..{geometry.total}")
    k = int(k)
    return (k - 1) % geometry.nx, (k - 1) // geometry.nx


def exponent(k: int, direction: Direction, geometry: ArrayGeometry) -> float:
    """Path-length exponent of element ``k`` (meters) for a plane wave from ``direction``."""
    i, j = index_maps(k, geometry)
    return _exponent(i, j, direction, geometry)


def exponents(direction: Direction, geometry: ArrayGeometry) -> np.ndarray:
    """Vector of :func:`exponent` over all elements, in element order."""
    i, j = geometry.grid_indices()
    return _exponent(i, j, direction, geometry)


def _exponent(i, j, direction, geometry):
    phi, theta = direction.azimuth, direction.elevation
    return i * geometry.dx * math.cos(theta) * math.sin(phi) + j * geometry.dy * math.sin(theta)


def array_response(direction: Direction, geometry: ArrayGeometry) -> np.ndarray:
    """Unit-modulus array response vector of length ``geometry.total``."""
    return np.exp(2j * np.pi / geometry.wavelength * exponents(direction, geometry))
