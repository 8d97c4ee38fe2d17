"""Imaging-domain grid and sensor geometry.

A ``DomainGrid`` is a uniform pixel grid in 2 or 3 dimensions.  Fields and
scattering potentials are plain numpy arrays shaped like ``grid.shape``;
``grid.pixel_centers()`` gives the physical coordinate of every pixel center.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError


@dataclass(frozen=True)
class DomainGrid:
    """Uniform pixel grid over the imaging domain.

    Parameters
    ----------
    shape : tuple of int
        Pixel count per axis (2 or 3 axes).
    spacing : float
        Pixel pitch in meters (isotropic).
    origin : tuple of float
        Physical coordinate of the center of pixel (0, ..., 0), meters.
    wavelength : float
        Vacuum wavelength in meters.
    background_permittivity : float
        Relative permittivity of the surrounding medium (> 0).
    """

    shape: tuple
    spacing: float
    origin: tuple
    wavelength: float
    background_permittivity: float = 1.0

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "origin", tuple(float(c) for c in self.origin))
        if len(shape) not in (2, 3):
            raise ConfigError("grid must have 2 or 3 axes")
        if any(n < 1 for n in shape):
            raise ConfigError("all grid dims must be >= 1")
        if len(self.origin) != len(shape):
            raise ConfigError("origin length must match the number of axes")
        if not (self.spacing > 0):
            raise ConfigError("spacing must be positive")
        if not (self.wavelength > 0):
            raise ConfigError("wavelength must be positive")
        if not (self.background_permittivity > 0):
            raise ConfigError("background permittivity must be positive")
        if not (np.isfinite(self.k) and np.isfinite(self.k_b)):
            raise ConfigError("derived wavenumbers must be finite")

    @property
    def ndim(self):
        return len(self.shape)

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def k(self):
        """Vacuum wavenumber 2*pi/wavelength."""
        return 2.0 * np.pi / self.wavelength

    @property
    def k_b(self):
        """Background wavenumber k * sqrt(eps_b)."""
        return self.k * np.sqrt(self.background_permittivity)

    @property
    def pixel_volume(self):
        """Pixel area (2D) or volume (3D)."""
        return self.spacing ** self.ndim

    def axis_coords(self, axis):
        n = self.shape[axis]
        return self.origin[axis] + self.spacing * np.arange(n)

    def pixel_centers(self):
        """Physical coordinates of all pixel centers, shape + (ndim,)."""
        axes = [self.axis_coords(d) for d in range(self.ndim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def bounding_box(self):
        """(lower, upper) corners of the pixel-covered region."""
        lo = np.array(self.origin) - 0.5 * self.spacing
        hi = np.array(self.origin) + self.spacing * (np.array(self.shape) - 0.5)
        return lo, hi

    def check_field(self, u, name="field"):
        u = np.asarray(u)
        if u.shape != self.shape:
            raise DimensionError(
                f"{name} has shape {u.shape}, expected grid shape {self.shape}")
        return u


def centered_grid(shape, spacing, wavelength, background_permittivity=1.0):
    """Grid whose pixel block is centered on the coordinate origin."""
    shape = tuple(int(n) for n in shape)
    origin = tuple(-0.5 * spacing * (n - 1) for n in shape)
    return DomainGrid(shape, spacing, origin, wavelength, background_permittivity)


@dataclass(frozen=True)
class SensorSet:
    """Sensor (receiver) positions in physical coordinates, shape (M, ndim)."""

    positions: np.ndarray = field(repr=False)

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pos.ndim != 2 or pos.shape[0] < 1:
            raise ConfigError("sensor set needs at least one position")
        object.__setattr__(self, "positions", pos)

    def __len__(self):
        return self.positions.shape[0]

    def warn_if_inside(self, grid):
        """Sensors inside the domain are unusual but allowed; warn once."""
        lo, hi = grid.bounding_box()
        inside = np.all((self.positions >= lo) & (self.positions <= hi), axis=1)
        if np.any(inside):
            warnings.warn(
                f"{int(inside.sum())} sensor(s) lie inside the imaging domain; "
                "proceeding anyway", stacklevel=2)


def ring_sensors(count, radius, center=(0.0, 0.0), phase=0.0):
    """2D ring of equally spaced sensors starting at angle ``phase``."""
    if count < 1:
        raise ConfigError("ring needs at least one sensor")
    ang = phase + 2.0 * np.pi * np.arange(count) / count
    pos = np.stack([center[0] + radius * np.cos(ang),
                    center[1] + radius * np.sin(ang)], axis=1)
    return SensorSet(pos)
