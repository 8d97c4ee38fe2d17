"""Synthetic scattering-potential phantoms.

Potentials are returned in physical units (1/m^2): a region at relative
contrast c carries the value c * k_b^2, so that max|f| / k_b^2 equals the
peak contrast.  Region edges can be rendered with supersampled area weighting
so the discrete image converges to the continuous shape.
"""

import numpy as np

from .errors import ConfigError


def contrast(f, grid):
    """Strength-of-scattering measure max|f| / k_b^2."""
    return float(np.max(np.abs(f))) / grid.k_b ** 2


def _subpixel_offsets(grid, supersample):
    h = grid.spacing
    step = h / supersample
    offs = -0.5 * h + step * (np.arange(supersample) + 0.5)
    return np.meshgrid(*([offs] * grid.ndim), indexing="ij")


def cylinders(grid, specs, supersample=4):
    """Sum of homogeneous disks (2D) or balls (3D).

    specs: iterable of (center, radius, contrast) with center in meters.
    Overlapping regions add.  ``supersample`` > 1 area-weights edge pixels.
    """
    if supersample < 1:
        raise ConfigError("supersample must be >= 1")
    centers = grid.pixel_centers()
    f = np.zeros(grid.shape)
    subs = _subpixel_offsets(grid, supersample)
    for center, radius, c in specs:
        center = np.asarray(center, dtype=float)
        if radius <= 0:
            raise ConfigError("cylinder radius must be positive")
        coverage = np.zeros(grid.shape)
        for off in zip(*(s.ravel() for s in subs)):
            pts = centers + np.asarray(off)
            dist_sq = np.sum((pts - center) ** 2, axis=-1)
            coverage += dist_sq <= radius * radius
        f += c * coverage / supersample ** grid.ndim
    return f * grid.k_b ** 2


# classic head phantom: (intensity, semi-axes a, b, center x, y, rotation deg)
_SHEPP_LOGAN = [
    (2.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0),
    (-0.98, 0.6624, 0.8740, 0.00, -0.0184, 0.0),
    (-0.02, 0.1100, 0.3100, 0.22, 0.0000, -18.0),
    (-0.02, 0.1600, 0.4100, -0.22, 0.0000, 18.0),
    (0.01, 0.2100, 0.2500, 0.00, 0.3500, 0.0),
    (0.01, 0.0460, 0.0460, 0.00, 0.1000, 0.0),
    (0.01, 0.0460, 0.0460, 0.00, -0.1000, 0.0),
    (0.01, 0.0460, 0.0230, -0.08, -0.6050, 0.0),
    (0.01, 0.0230, 0.0230, 0.00, -0.6060, 0.0),
    (0.01, 0.0230, 0.0460, 0.06, -0.6050, 0.0),
]


def shepp_logan(grid, peak_contrast, extent=None):
    """Ten-ellipse head phantom (2D), scaled so max|f|/k_b^2 = peak_contrast.

    ``extent`` is the physical half-width the unit phantom square maps to;
    defaults to half the domain width.
    """
    if grid.ndim != 2:
        raise ConfigError("head phantom is 2D only")
    if extent is None:
        extent = 0.5 * grid.spacing * grid.shape[0]
    centers = grid.pixel_centers() / extent  # phantom defined on [-1, 1]^2
    x = centers[..., 0]
    y = centers[..., 1]
    img = np.zeros(grid.shape)
    for amp, a, b, cx, cy, ang in _SHEPP_LOGAN:
        t = np.deg2rad(ang)
        xr = (x - cx) * np.cos(t) + (y - cy) * np.sin(t)
        yr = -(x - cx) * np.sin(t) + (y - cy) * np.cos(t)
        img += amp * ((xr / a) ** 2 + (yr / b) ** 2 <= 1.0)
    peak = np.max(np.abs(img))
    if peak == 0:
        raise ConfigError("phantom does not intersect the grid")
    return img * (peak_contrast * grid.k_b ** 2 / peak)
