"""Closed-form scattering of a point source by a homogeneous cylinder (2D)
or sphere (3D).

These are the textbook separation-of-variables solutions: the field is
expanded in cylindrical/spherical harmonics, the radial factor in each order
is pieced together from Bessel functions in three regions (inside the object,
between object and source radius, beyond the source), and the coefficients
follow from continuity at the interface plus the source jump condition.  The
object has radius ``r_sph`` and real refractive index ``n`` relative to the
background; the source sits at distance ``r_s`` from the center (on the
positive x-axis in 2D, on the zenith axis in 3D).

With ``n = 1`` the whole construction collapses to the free-space Green's
function, which the tests exploit as an oracle.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ConvergenceWarning, ResonanceError
from .special import (bessel_jn_all, bessel_yn_all, legendre_all,
                      spherical_jn_all, spherical_yn_all)


@dataclass(frozen=True)
class AnalyticScene:
    """Geometry of the closed-form scattering problem.

    truncation: highest retained harmonic order; defaults to
    ceil(k_b * r_sph) + 30 (size parameter plus margin).
    """

    r_sph: float
    refractive_index: float
    r_s: float
    k_b: float
    truncation: int | None = None

    def __post_init__(self):
        if not (self.r_s > self.r_sph > 0):
            raise ConfigError("need source distance r_s > object radius r_sph > 0")
        if not self.refractive_index > 0:
            raise ConfigError("refractive index must be positive")
        if not self.k_b > 0:
            raise ConfigError("background wavenumber must be positive")
        if self.truncation is not None and self.truncation < 1:
            raise ConfigError("truncation must be >= 1")

    @property
    def order_cutoff(self):
        if self.truncation is not None:
            return int(self.truncation)
        return int(np.ceil(self.k_b * self.r_sph)) + 30


def _coeff_tables_2d(scene, mmax):
    """a_m, b_m, c_m for m = 0..mmax (symmetric in the sign of m)."""
    n = scene.refractive_index
    rho_sph = scene.k_b * scene.r_sph
    # J_{m-1} at m = 0 is J_{-1} = -J_1; evaluate orders 0..mmax and reflect
    j_in = bessel_jn_all(mmax, np.array([n * rho_sph]))[:, 0]
    j_b = bessel_jn_all(mmax, np.array([rho_sph]))[:, 0]
    y_b = bessel_yn_all(mmax, np.array([rho_sph]))[:, 0]
    h_b = j_b + 1j * y_b

    def prev(tab, m):
        return -tab[1] if m == 0 else tab[m - 1]

    a = np.zeros(mmax + 1, dtype=complex)
    b = np.zeros(mmax + 1, dtype=complex)
    c = np.zeros(mmax + 1, dtype=complex)
    for m in range(mmax + 1):
        col1 = (j_in[m], prev(j_in, m) * n)
        delta = col1[0] * prev(h_b, m) - col1[1] * h_b[m]
        if not np.isfinite(delta) or abs(delta) == 0.0:
            raise ResonanceError(f"degenerate radial determinant at order {m}")
        a[m] = -1.0 / (rho_sph * delta)
        b[m] = (-np.pi / (2.0 * delta)) * (col1[0] * prev(y_b, m) - col1[1] * y_b[m])
        c[m] = (np.pi / (2.0 * delta)) * (col1[0] * prev(j_b, m) - col1[1] * j_b[m])
    return a, b, c


def radial_coeffs_2d(m, scene):
    """(a_m, b_m, c_m) of the 2D three-region radial solution; m may be signed."""
    m = abs(int(m))
    if m > scene.order_cutoff:
        raise ConfigError(f"order {m} exceeds truncation {scene.order_cutoff}")
    a, b, c = _coeff_tables_2d(scene, max(m, 1))
    return a[m], b[m], c[m]


def _radial_2d(scene, mmax, r, coeffs):
    """R_m(r, r_s) for m = 0..mmax at the (flat) radii r; shape (mmax+1, P)."""
    a, b, c = coeffs
    n = scene.refractive_index
    rho = scene.k_b * r
    rho_s = scene.k_b * scene.r_s
    j_s = bessel_jn_all(mmax, np.array([rho_s]))[:, 0]
    y_s = bessel_yn_all(mmax, np.array([rho_s]))[:, 0]
    h_s = j_s + 1j * y_s

    out = np.zeros((mmax + 1, r.size), dtype=complex)
    inside = r < scene.r_sph
    annulus = (~inside) & (r < scene.r_s)
    beyond = r >= scene.r_s
    if np.any(inside):
        jn_in = bessel_jn_all(mmax, n * rho[inside])
        out[:, inside] = a[:, None] * jn_in * h_s[:, None]
    if np.any(annulus):
        j_r = bessel_jn_all(mmax, rho[annulus])
        y_r = bessel_yn_all(mmax, rho[annulus])
        out[:, annulus] = (b[:, None] * j_r + c[:, None] * y_r) * h_s[:, None]
    if np.any(beyond):
        j_r = bessel_jn_all(mmax, rho[beyond])
        y_r = bessel_yn_all(mmax, rho[beyond])
        amp = (b * j_s + c * y_s)
        out[:, beyond] = amp[:, None] * (j_r + 1j * y_r)
    return out


def analytic_field_2d(r, theta, scene):
    """Total field of a unit line source scattered by the cylinder.

    ``r`` and ``theta`` are broadcast-compatible arrays (or scalars) of polar
    coordinates about the cylinder center, with the source at theta = 0.
    Warns with ConvergenceWarning when the series tail is not below 1e-8 of
    the running field magnitude.
    """
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    r, theta = np.broadcast_arrays(r, theta)
    shape = r.shape
    r = r.ravel().copy()
    theta = theta.ravel()
    if np.any((r == scene.r_s) & (np.cos(theta) == 1.0)):
        raise ConfigError("observation point coincides with the source")
    r = np.maximum(r, 1e-9 * scene.r_sph)  # nudge exact-center evaluations
    mmax = scene.order_cutoff
    coeffs = _coeff_tables_2d(scene, mmax)
    radial = _radial_2d(scene, mmax, r, coeffs)
    orders = np.arange(mmax + 1)
    phases = np.cos(np.outer(orders, theta))
    weights = np.full(mmax + 1, 2.0)
    weights[0] = 1.0
    total = (weights[:, None] * radial * phases).sum(axis=0) / (2.0 * np.pi)

    tail = (np.abs(radial[-1]) + np.abs(radial[-2])) / (2.0 * np.pi)
    mag = np.abs(total)
    bad = tail > 1e-8 * np.maximum(mag, 1e-300)
    if np.any(bad):
        warnings.warn(
            f"harmonic series tail above 1e-8 of the field at {int(bad.sum())} "
            f"point(s); raise truncation (currently {mmax})", ConvergenceWarning,
            stacklevel=2)
    return total.reshape(shape) if shape else complex(total[0])


def _coeff_tables_3d(scene, lmax):
    """A_l, B_l, C_l for l = 0..lmax."""
    n = scene.refractive_index
    rho_sph = scene.k_b * scene.r_sph
    j_in = spherical_jn_all(lmax + 1, np.array([n * rho_sph]))[:, 0]
    j_b = spherical_jn_all(lmax + 1, np.array([rho_sph]))[:, 0]
    y_b = spherical_yn_all(lmax + 1, np.array([rho_sph]))[:, 0]
    h_b = j_b + 1j * y_b

    A = np.zeros(lmax + 1, dtype=complex)
    B = np.zeros(lmax + 1, dtype=complex)
    C = np.zeros(lmax + 1, dtype=complex)
    for l in range(lmax + 1):
        col1 = (j_in[l], n * j_in[l + 1])
        delta = col1[0] * h_b[l + 1] - col1[1] * h_b[l]
        if not np.isfinite(delta) or abs(delta) == 0.0:
            raise ResonanceError(f"degenerate radial determinant at order {l}")
        A[l] = scene.k_b / (rho_sph ** 2 * delta)
        B[l] = (-scene.k_b / delta) * (col1[0] * y_b[l + 1] - col1[1] * y_b[l])
        C[l] = (scene.k_b / delta) * (col1[0] * j_b[l + 1] - col1[1] * j_b[l])
    return A, B, C


def radial_coeffs_3d(l, scene):
    """(A_l, B_l, C_l) of the 3D three-region radial solution."""
    l = int(l)
    if l < 0:
        raise ConfigError("order must be >= 0")
    if l > scene.order_cutoff:
        raise ConfigError(f"order {l} exceeds truncation {scene.order_cutoff}")
    A, B, C = _coeff_tables_3d(scene, l)
    return A[l], B[l], C[l]


def _radial_3d(scene, lmax, r, coeffs):
    A, B, C = coeffs
    n = scene.refractive_index
    rho = scene.k_b * r
    rho_s = scene.k_b * scene.r_s
    j_s = spherical_jn_all(lmax, np.array([rho_s]))[:, 0]
    y_s = spherical_yn_all(lmax, np.array([rho_s]))[:, 0]
    h_s = j_s + 1j * y_s

    out = np.zeros((lmax + 1, r.size), dtype=complex)
    inside = r < scene.r_sph
    annulus = (~inside) & (r < scene.r_s)
    beyond = r >= scene.r_s
    if np.any(inside):
        jl_in = spherical_jn_all(lmax, n * rho[inside])
        out[:, inside] = A[:, None] * jl_in * h_s[:, None]
    if np.any(annulus):
        j_r = spherical_jn_all(lmax, rho[annulus])
        y_r = spherical_yn_all(lmax, rho[annulus])
        out[:, annulus] = (B[:, None] * j_r + C[:, None] * y_r) * h_s[:, None]
    if np.any(beyond):
        j_r = spherical_jn_all(lmax, rho[beyond])
        y_r = spherical_yn_all(lmax, rho[beyond])
        amp = B * j_s + C * y_s
        out[:, beyond] = amp[:, None] * (j_r + 1j * y_r)
    return out


def analytic_field_3d(r, theta, scene):
    """Total field of a unit point source on the zenith axis scattered by the
    sphere, at spherical coordinates (r, zenith angle theta)."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    r, theta = np.broadcast_arrays(r, theta)
    shape = r.shape
    r = r.ravel().copy()
    theta = theta.ravel()
    if np.any((r == scene.r_s) & (np.cos(theta) == 1.0)):
        raise ConfigError("observation point coincides with the source")
    r = np.maximum(r, 1e-9 * scene.r_sph)
    lmax = scene.order_cutoff
    coeffs = _coeff_tables_3d(scene, lmax)
    radial = _radial_3d(scene, lmax, r, coeffs)
    pl = legendre_all(lmax, np.cos(theta))
    weights = (2.0 * np.arange(lmax + 1) + 1.0) / (4.0 * np.pi)
    total = (weights[:, None] * radial * pl).sum(axis=0)

    tail = (np.abs(radial[-1] * weights[-1]) + np.abs(radial[-2] * weights[-2]))
    mag = np.abs(total)
    bad = tail > 1e-8 * np.maximum(mag, 1e-300)
    if np.any(bad):
        warnings.warn(
            f"harmonic series tail above 1e-8 of the field at {int(bad.sum())} "
            f"point(s); raise truncation (currently {lmax})", ConvergenceWarning,
            stacklevel=2)
    return total.reshape(shape) if shape else complex(total[0])


def helmholtz_residual(sampler, k_sq, grid, exclude=None):
    """Max pointwise Helmholtz residual |lap E + k^2 E| / |k^2 E| on the grid.

    ``sampler`` maps physical points of shape (..., ndim) to the complex
    field; ``k_sq`` maps points to the local k^2 (scalar or array).  The
    five-point (2D) / seven-point (3D) Laplacian is formed on interior pixels;
    ``exclude`` optionally masks out pixels (e.g. a band around a source or a
    material interface) in grid shape.
    """
    pts = grid.pixel_centers()
    E = np.asarray(sampler(pts), dtype=complex)
    if E.shape != grid.shape:
        raise ConfigError("sampler did not return one value per pixel")
    ksq = np.broadcast_to(np.asarray(k_sq(pts), dtype=float), grid.shape)

    h2 = grid.spacing ** 2
    lap = np.zeros_like(E)
    interior = np.ones(grid.shape, dtype=bool)
    for d in range(grid.ndim):
        lap += (np.roll(E, 1, axis=d) + np.roll(E, -1, axis=d) - 2.0 * E) / h2
        idx_lo = tuple(0 if a == d else slice(None) for a in range(grid.ndim))
        idx_hi = tuple(-1 if a == d else slice(None) for a in range(grid.ndim))
        interior[idx_lo] = False
        interior[idx_hi] = False
    if exclude is not None:
        interior &= ~np.asarray(exclude, dtype=bool)
    if not np.any(interior):
        raise ConfigError("no interior pixels left after exclusion")
    resid = np.abs(lap + ksq * E)
    scale = np.abs(ksq * E)
    scale = np.where(scale > 0, scale, np.inf)
    return float(np.max(resid[interior] / scale[interior]))
