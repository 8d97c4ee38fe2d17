"""Configuration, measurement, image, and table file formats.

Everything on disk is plain text.  Physical quantities carry SI units with
unit-suffixed key names.  Floats are written with 17 significant digits so a
write/read round trip is bit exact.

Measurement files (native format) are a single-line JSON header holding the
geometry and frequency, followed by CSV rows ``tx,rx,re,im`` with the
measured scattered field per (transmitter, receiver-slot) pair.

The Institut-Fresnel single-frequency ASCII layout is also readable: per row
``tx rx freq re_total im_total re_incident im_incident`` (whitespace
separated, ``#`` comments allowed, frequency in GHz).  The scattered field is
total minus incident; the ring geometry is synthesized from the published
constants (1.67 m radius, 360 receiver slots, transmitters evenly spaced) and
the incident field recorded at the receivers calibrates a per-transmitter
complex source amplitude by least squares against the line-source model.
"""

import json
import math
import os

import numpy as np

from .errors import ConfigError, MeasurementParseError
from .forward import ForwardConfig
from .grid import DomainGrid, SensorSet, centered_grid, ring_sensors
from .recon import MeasurementSet, ReconConfig, Transmitter
from .tv import BoxConstraint

SPEED_OF_LIGHT = 299792458.0

FRESNEL_RING_RADIUS_M = 1.67
FRESNEL_RECEIVER_SLOTS = 360


def _fmt(x):
    return f"{float(x):.17g}"


# ---------------------------------------------------------------------------
# experiment configuration


def parse_config(text):
    """Parse the JSON experiment configuration into a plain dict (validated)."""
    cfg = json.loads(text)
    for key in ("grid",):
        if key not in cfg:
            raise ConfigError(f"config is missing the '{key}' section")
    g = cfg["grid"]
    for key in ("shape", "spacing_m", "wavelength_m"):
        if key not in g:
            raise ConfigError(f"grid section is missing '{key}'")
    if any(int(n) < 1 for n in g["shape"]):
        raise ConfigError("grid shape entries must be >= 1")
    sub = cfg.get("receivers", {}).get("subsample", 1)
    if sub not in (1, 2, 4, 8, 16, 32, 64, 128):
        raise ConfigError("receivers.subsample must be a power of 2 up to 128")
    phantom = cfg.get("phantom", {})
    if phantom.get("kind") == "from_file" and not os.path.exists(phantom.get("path", "")):
        raise ConfigError(f"phantom file not found: {phantom.get('path')}")
    return cfg


def serialize_config(cfg):
    return json.dumps(cfg, indent=2, sort_keys=True) + "\n"


def grid_from_config(cfg):
    g = cfg["grid"]
    if "origin_m" in g:
        return DomainGrid(tuple(g["shape"]), g["spacing_m"], tuple(g["origin_m"]),
                          g["wavelength_m"], g.get("background_permittivity", 1.0))
    return centered_grid(tuple(g["shape"]), g["spacing_m"], g["wavelength_m"],
                         g.get("background_permittivity", 1.0))


def recon_config_from_config(cfg):
    r = cfg.get("recon", {})
    fwd = r.get("forward", {})
    forward = ForwardConfig(
        K=fwd.get("K", 60),
        delta_tol=fwd.get("delta_tol", 0.0),
        delta_tol_rel=fwd.get("delta_tol_rel", 5e-7 if "delta_tol" not in fwd else None),
        step_mode=fwd.get("step_mode", "adaptive"),
        nu=fwd.get("nu"),
        stop_on=fwd.get("stop_on", "objective" if "delta_tol" not in fwd else "gradient"),
    )
    box = r.get("box", {})
    return ReconConfig(
        forward=forward,
        tau=r.get("tau"),
        tau_rel=r.get("tau_rel", 1.5e-9 if r.get("tau") is None else None),
        step_gamma=r.get("step_gamma"),
        fista_iters=r.get("fista_iters", 50),
        tv_variant=r.get("tv_variant", "iso"),
        tv_iters=r.get("tv_iters", 10),
        tv_delta=r.get("tv_delta", 1e-4),
        box=BoxConstraint(box.get("lower", 0.0),
                          box.get("upper", math.inf)),
        workers=r.get("workers", 1),
    )


# ---------------------------------------------------------------------------
# native measurement files


def _tx_to_json(tx):
    d = {"kind": tx.kind, "amplitude": [tx.amplitude.real, tx.amplitude.imag]}
    if tx.kind == "point":
        d["position_m"] = list(tx.position)
    else:
        d["direction"] = list(tx.direction)
    return d


def _tx_from_json(d):
    amp = complex(d["amplitude"][0], d["amplitude"][1])
    if d["kind"] == "point":
        return Transmitter("point", position=tuple(d["position_m"]), amplitude=amp)
    return Transmitter("plane", direction=tuple(d["direction"]), amplitude=amp)


def save_measurements(path, mset):
    """Write a MeasurementSet: one JSON header line, then tx,rx,re,im rows."""
    header = {
        "format": "wavetomo-measurements-v1",
        "frequency_hz": mset.frequency_hz,
        "transmitters": [_tx_to_json(tx) for tx in mset.transmitters],
        "receiver_positions_m": mset.receivers.positions.tolist(),
    }
    lines = [json.dumps(header, sort_keys=True)]
    for t, (ix, y) in enumerate(zip(mset.active_indices, mset.y)):
        for r, v in zip(ix, y):
            lines.append(f"{t},{int(r)},{_fmt(v.real)},{_fmt(v.imag)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_measurements(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MeasurementParseError("empty file", line=1)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise MeasurementParseError(f"bad JSON header: {exc}", line=1) from None
    if header.get("format") != "wavetomo-measurements-v1":
        raise MeasurementParseError("unrecognized format tag", line=1)
    receivers = SensorSet(np.array(header["receiver_positions_m"], dtype=float))
    transmitters = [_tx_from_json(d) for d in header["transmitters"]]
    per_tx_ix = [[] for _ in transmitters]
    per_tx_y = [[] for _ in transmitters]
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split(",")
        if len(parts) != 4:
            raise MeasurementParseError("expected tx,rx,re,im", line=lineno)
        try:
            t = int(parts[0])
            r = int(parts[1])
            v = complex(float(parts[2]), float(parts[3]))
        except ValueError as exc:
            raise MeasurementParseError(str(exc), line=lineno) from None
        if not 0 <= t < len(transmitters):
            raise MeasurementParseError(f"transmitter index {t} out of range",
                                        line=lineno)
        per_tx_ix[t].append(r)
        per_tx_y[t].append(v)
    return MeasurementSet(
        transmitters=transmitters,
        receivers=receivers,
        active_indices=[np.array(ix, dtype=int) for ix in per_tx_ix],
        y=[np.array(v, dtype=complex) for v in per_tx_y],
        frequency_hz=header.get("frequency_hz"))


# ---------------------------------------------------------------------------
# Institut-Fresnel ASCII layout


def fresnel_active_slots(tx_angle_deg, n_slots=FRESNEL_RECEIVER_SLOTS,
                         keep_min_deg=60.0):
    """Receiver slots used for one transmitter: the 119 closest are excluded,
    i.e. keep circular angular distance >= 60 degrees (241 of 360 slots)."""
    slot_angles = np.arange(n_slots) * (360.0 / n_slots)
    d = np.abs((slot_angles - tx_angle_deg + 180.0) % 360.0 - 180.0)
    return np.nonzero(d >= keep_min_deg - 1e-9)[0]


def load_fresnel_ascii(path, frequency_ghz=3.0):
    """Load one frequency channel of a Fresnel-layout ASCII file.

    Rows: ``tx rx freq re_total im_total re_inc im_inc`` with 1-based tx/rx
    indices and frequency in GHz (values above 1e6 are taken as Hz).  The
    scattered field is total - incident.  Transmitter positions are placed
    evenly on the 1.67 m rim; each transmitter's complex amplitude is the
    least-squares fit of the line-source model to its recorded incident field.
    """
    rows = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            s = raw.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 7:
                raise MeasurementParseError(
                    f"expected 7 columns, got {len(parts)}", line=lineno)
            try:
                vals = [float(p) for p in parts]
            except ValueError as exc:
                raise MeasurementParseError(str(exc), line=lineno) from None
            rows.append((lineno, vals))
    if not rows:
        raise MeasurementParseError("no data rows", line=1)

    def to_ghz(v):
        return v / 1e9 if v > 1e6 else v

    sel = [(ln, v) for ln, v in rows
           if abs(to_ghz(v[2]) - frequency_ghz) <= 1e-6 * frequency_ghz]
    if not sel:
        raise MeasurementParseError(
            f"no rows at {frequency_ghz} GHz", line=rows[0][0])

    n_tx = int(max(v[0] for _, v in sel))
    if n_tx < 1:
        raise MeasurementParseError("transmitter indices must be 1-based",
                                    line=sel[0][0])
    receivers = ring_sensors(FRESNEL_RECEIVER_SLOTS, FRESNEL_RING_RADIUS_M)
    tx_step = 360.0 / n_tx
    freq_hz = frequency_ghz * 1e9
    k_b = 2.0 * np.pi * freq_hz / SPEED_OF_LIGHT

    per_ix = [[] for _ in range(n_tx)]
    per_sc = [[] for _ in range(n_tx)]
    per_inc = [[] for _ in range(n_tx)]
    for ln, v in sel:
        t = int(v[0]) - 1
        r = int(v[1]) - 1
        if not 0 <= r < FRESNEL_RECEIVER_SLOTS:
            raise MeasurementParseError(f"receiver index {r + 1} out of range",
                                        line=ln)
        tot = complex(v[3], v[4])
        inc = complex(v[5], v[6])
        per_ix[t].append(r)
        per_sc[t].append(tot - inc)
        per_inc[t].append(inc)

    transmitters = []
    for t in range(n_tx):
        ang = np.deg2rad(t * tx_step)
        pos = (FRESNEL_RING_RADIUS_M * np.cos(ang),
               FRESNEL_RING_RADIUS_M * np.sin(ang))
        tx = Transmitter("point", position=pos)
        ix = np.array(per_ix[t], dtype=int)
        if ix.size:
            model = tx.field_at(receivers.positions[ix], k_b)
            rec = np.array(per_inc[t], dtype=complex)
            denom = np.vdot(model, model)
            amp = np.vdot(model, rec) / denom if abs(denom) > 0 else 1.0
            tx = Transmitter("point", position=pos, amplitude=complex(amp))
        transmitters.append(tx)

    return MeasurementSet(
        transmitters=transmitters,
        receivers=receivers,
        active_indices=[np.array(ix, dtype=int) for ix in per_ix],
        y=[np.array(v, dtype=complex) for v in per_sc],
        frequency_hz=freq_hz)


# ---------------------------------------------------------------------------
# images and tables


def emit_image(values, path):
    """16-bit binary portable graymap, min-max windowed.

    The applied window is recorded in ``<path>.window.txt``.  A constant
    image maps to mid-gray (32767).
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ConfigError("image emission expects a 2D array")
    lo = float(values.min())
    hi = float(values.max())
    if hi > lo:
        scaled = np.round((values - lo) / (hi - lo) * 65535.0).astype(">u2")
    else:
        scaled = np.full(values.shape, 32767, dtype=">u2")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{values.shape[1]} {values.shape[0]}\n65535\n".encode())
        fh.write(scaled.tobytes())
    with open(str(path) + ".window.txt", "w") as fh:
        fh.write(f"min {_fmt(lo)}\nmax {_fmt(hi)}\n")


def emit_grid_csv(values, grid, path, units="1/m^2"):
    """CSV matrix of a grid image with a header naming units and grid spec."""
    values = np.asarray(values)
    header = (f"# shape={'x'.join(str(n) for n in grid.shape)}"
              f" spacing_m={_fmt(grid.spacing)}"
              f" origin_m={','.join(_fmt(c) for c in grid.origin)}"
              f" wavelength_m={_fmt(grid.wavelength)}"
              f" units={units}")
    lines = [header]
    for row in values.reshape(grid.shape[0], -1):
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_grid_csv(path):
    """Read back an emit_grid_csv file; returns (values, header_dict)."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    meta = {}
    data = []
    for ln in lines:
        if ln.startswith("#"):
            for tokens in ln[1:].split():
                if "=" in tokens:
                    k, v = tokens.split("=", 1)
                    meta[k] = v
            continue
        data.append([float(v) for v in ln.split(",")])
    return np.array(data), meta


def emit_table_csv(columns, path):
    """CSV with named columns: columns is a dict of name -> 1D array."""
    names = list(columns)
    arrays = [np.asarray(columns[n]).ravel() for n in names]
    n = arrays[0].size
    if any(a.size != n for a in arrays):
        raise ConfigError("table columns differ in length")
    lines = [",".join(names)]
    for i in range(n):
        lines.append(",".join(_fmt(a[i]) for a in arrays))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
