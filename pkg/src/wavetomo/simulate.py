"""Synthetic experiment assembly: layouts, phantom rendering, measurement
generation, and parameter sweeps.

Measurement generation deliberately avoids the inverse crime: the data is
computed on a refined grid (default 2x per axis) with a larger expansion
order (default 4x the reconstruction order), then the reconstruction runs on
the configured grid.
"""

import numpy as np

from . import phantoms
from .analytic import analytic_field_2d
from .errors import ConfigError
from .fileio import (SPEED_OF_LIGHT, grid_from_config, load_grid_csv,
                     recon_config_from_config)
from .forward import ForwardConfig, forward_solve
from .greens import build_domain_operator, build_sensor_operator
from .grid import DomainGrid, ring_sensors
from .metrics import normalized_error
from .recon import MeasurementSet, Transmitter


def transmitters_from_config(cfg):
    t = cfg.get("transmitters")
    if t is None:
        raise ConfigError("config is missing the 'transmitters' section")
    if isinstance(t, list):
        out = []
        for d in t:
            if d.get("kind") == "plane":
                out.append(Transmitter("plane", direction=tuple(d["direction"])))
            else:
                out.append(Transmitter("point", position=tuple(d["position_m"])))
        return out
    if t.get("kind", "point-ring") != "point-ring":
        raise ConfigError("transmitters.kind must be 'point-ring' or an explicit list")
    count = int(t["count"])
    radius = float(t["radius_m"])
    phase = float(t.get("phase_rad", 0.0))
    ang = phase + 2.0 * np.pi * np.arange(count) / count
    return [Transmitter("point", position=(radius * np.cos(a), radius * np.sin(a)))
            for a in ang]


def receivers_from_config(cfg):
    r = cfg.get("receivers")
    if r is None:
        raise ConfigError("config is missing the 'receivers' section")
    return ring_sensors(int(r["count"]), float(r["ring_radius_m"]),
                        phase=float(r.get("phase_rad", 0.0)))


def render_phantom(cfg, grid):
    p = cfg.get("phantom", {"kind": "none"})
    kind = p.get("kind", "none")
    if kind == "none":
        return np.zeros(grid.shape)
    if kind == "cylinders":
        specs = [(tuple(c["center_m"]), float(c["radius_m"]), float(c["contrast"]))
                 for c in p["cylinders"]]
        return phantoms.cylinders(grid, specs, supersample=int(p.get("supersample", 4)))
    if kind == "shepp_logan":
        return phantoms.shepp_logan(grid, float(p["contrast"]),
                                    extent=p.get("extent_m"))
    if kind == "from_file":
        values, _ = load_grid_csv(p["path"])
        if values.shape != grid.shape:
            raise ConfigError(f"phantom file shape {values.shape} does not match "
                              f"grid {grid.shape}")
        return values
    raise ConfigError(f"unknown phantom kind '{kind}'")


def refined_grid(grid, refine):
    """Grid with ``refine`` x pixels per axis over the same physical extent."""
    if refine < 1:
        raise ConfigError("grid refinement must be >= 1")
    spacing = grid.spacing / refine
    shape = tuple(n * refine for n in grid.shape)
    origin = tuple(c - 0.5 * grid.spacing + 0.5 * spacing for c in grid.origin)
    return DomainGrid(shape, spacing, origin, grid.wavelength,
                      grid.background_permittivity)


def simulate_measurements(cfg):
    """Generate synthetic measurements per the experiment config.

    Returns (measurements, f_true) with f_true rendered on the reconstruction
    grid.  Deterministic for a fixed config (the noise draw is seeded).
    """
    grid = grid_from_config(cfg)
    recon_cfg = recon_config_from_config(cfg)
    gen = cfg.get("generation", {})
    refine = int(gen.get("grid_refine", 2))
    k_mult = int(gen.get("k_multiplier", 4))

    fine = refined_grid(grid, refine)
    f_fine = render_phantom(cfg, fine)
    f_true = render_phantom(cfg, grid)

    transmitters = transmitters_from_config(cfg)
    receivers = receivers_from_config(cfg)
    G = build_domain_operator(fine)
    H = build_sensor_operator(fine, receivers)
    fwd = ForwardConfig(K=max(1, k_mult * recon_cfg.forward.K),
                        delta_tol=recon_cfg.forward.delta_tol,
                        delta_tol_rel=recon_cfg.forward.delta_tol_rel,
                        stop_on=recon_cfg.forward.stop_on)

    all_slots = np.arange(len(receivers))
    y = []
    for tx in transmitters:
        u_in = tx.field_on_grid(fine)
        y.append(forward_solve(f_fine, u_in, G, H, fwd).z)

    snr_db = gen.get("noise_snr_db")
    if snr_db is not None:
        rng = np.random.default_rng(int(cfg.get("seed", 0)))
        power = np.mean([np.mean(np.abs(v) ** 2) for v in y])
        sigma = np.sqrt(power * 10.0 ** (-float(snr_db) / 10.0) / 2.0)
        y = [v + sigma * (rng.standard_normal(v.shape)
                          + 1j * rng.standard_normal(v.shape)) for v in y]

    mset = MeasurementSet(
        transmitters=transmitters,
        receivers=receivers,
        active_indices=[all_slots.copy() for _ in transmitters],
        y=y,
        frequency_hz=SPEED_OF_LIGHT / grid.wavelength)
    factor = cfg.get("receivers", {}).get("subsample", 1)
    if factor != 1:
        mset = mset.subsample(int(factor))
    return mset, f_true


def forward_error_vs_analytic(grid, scene, K_values, source_position,
                              born=True, supersample=8, G=None):
    """Normalized field error of the expansion against the closed-form
    cylinder solution, per expansion order K (and optionally first Born).

    The cylinder sits at the grid center with radius scene.r_sph and contrast
    n^2 - 1 (so the potential is k_b^2 (n^2 - 1) inside); the source is a unit
    line source at ``source_position``, which must match scene.r_s on the
    positive x-axis convention of the analytic solution.
    """
    source_position = np.asarray(source_position, dtype=float)
    if abs(np.linalg.norm(source_position) - scene.r_s) > 1e-9 * scene.r_s:
        raise ConfigError("source distance does not match scene.r_s")
    pts = grid.pixel_centers()
    r = np.linalg.norm(pts, axis=-1)
    # the closed form puts the source at theta = 0; rotate into its frame
    theta = (np.arctan2(pts[..., 1], pts[..., 0])
             - np.arctan2(source_position[1], source_position[0]))
    u_true = analytic_field_2d(r, theta, scene)

    contrast_value = scene.refractive_index ** 2 - 1.0
    f = phantoms.cylinders(grid, [((0.0, 0.0), scene.r_sph, contrast_value)],
                           supersample=supersample)
    if G is None:
        G = build_domain_operator(grid)
    tx = Transmitter("point", position=source_position)
    u_in = tx.field_on_grid(grid)

    errors = []
    for K in K_values:
        fwd = ForwardConfig(K=int(K))
        trace = forward_solve(f, u_in, G, None, fwd)
        errors.append(normalized_error(trace.u_hat, u_true))
    out = {"K": list(K_values), "error": errors}
    if born:
        u_born = u_in + G.apply(u_in * f)
        out["born_error"] = normalized_error(u_born, u_true)
    return out
