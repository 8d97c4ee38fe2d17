import numpy as np
import pytest

import wavetomo as wt
from wavetomo.errors import ConfigError


@pytest.fixture
def grid():
    return wt.centered_grid((48, 48), spacing=0.5 / 16, wavelength=0.5)


def test_cylinder_contrast_and_area(grid):
    radius = 0.3
    f = wt.cylinders(grid, [((0.0, 0.0), radius, 0.2)], supersample=8)
    assert wt.contrast(f, grid) == pytest.approx(0.2)
    # supersampled coverage integrates to the disk area
    area = np.sum(f) / (0.2 * grid.k_b ** 2) * grid.pixel_volume
    assert area == pytest.approx(np.pi * radius ** 2, rel=5e-3)


def test_cylinder_edges_are_fractional(grid):
    f = wt.cylinders(grid, [((0.0, 0.0), 0.3, 0.2)], supersample=8)
    peak = 0.2 * grid.k_b ** 2
    frac = (f > 0.05 * peak) & (f < 0.95 * peak)
    assert np.count_nonzero(frac) > 0


def test_overlapping_regions_add(grid):
    f = wt.cylinders(grid, [((0.0, 0.0), 0.2, 0.1), ((0.0, 0.0), 0.1, 0.1)])
    assert wt.contrast(f, grid) == pytest.approx(0.2)


def test_invalid_radius(grid):
    with pytest.raises(ConfigError):
        wt.cylinders(grid, [((0.0, 0.0), -0.1, 0.2)])


def test_shepp_logan_peak_contrast(grid):
    f = wt.shepp_logan(grid, 0.2)
    assert wt.contrast(f, grid) == pytest.approx(0.2)
    # the head outline occupies a minority of the grid and has structure
    assert 0.05 < np.mean(f != 0.0) < 0.9
    assert len(np.unique(np.round(f / np.max(np.abs(f)), 6))) > 3


def test_shepp_logan_requires_2d():
    grid3 = wt.DomainGrid((4, 4, 4), 0.01, (0, 0, 0), 0.1)
    with pytest.raises(ConfigError):
        wt.shepp_logan(grid3, 0.2)
