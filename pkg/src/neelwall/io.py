"""Artifact persistence: CSV/JSON writers and readers, checksums, manifest.

All floats are written with repr-exact precision so that rerunning with the
same config and seed reproduces artifacts byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import platform
from pathlib import Path

import numpy as np

from .grid import Field, Grid
from .profile import WallProfile, phase_derivative

__all__ = [
    "fmt",
    "write_csv",
    "sha256_file",
    "profile_to_artifacts",
    "profile_from_artifacts",
    "write_json",
    "trace_to_csv",
    "eigenvalues_to_csv",
    "essential_curve_to_csv",
    "dump_operator",
    "write_manifest",
]


def fmt(x) -> str:
    """Round-trip exact decimal form of a float."""
    return repr(float(x))


def write_csv(path, header: str, rows):
    path = Path(path)
    lines = [header]
    for row in rows:
        lines.append(",".join(fmt(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_json(path, payload: dict):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    digest.update(Path(path).read_bytes())
    return digest.hexdigest()


def profile_to_artifacts(profile: WallProfile, csv_path, json_path, solver_meta: dict | None = None):
    g = profile.grid
    rows = zip(
        (float(v) for v in g.nodes),
        (float(v) for v in profile.theta.values),
        (float(v) for v in profile.dtheta.values),
    )
    write_csv(csv_path, "x,theta,dtheta", rows)
    sidecar = {
        "n": g.n,
        "R": g.half_width,
        "pad_factor": g.pad_factor,
        "energy": profile.energy,
        "residual_l2": profile.residual_l2,
        "min_slope": profile.min_slope,
        "odd_defect": profile.odd_defect,
        "solver": dict(solver_meta or {}, iterations=profile.iterations),
    }
    write_json(json_path, sidecar)


def profile_from_artifacts(csv_path, json_path) -> WallProfile:
    meta = json.loads(Path(json_path).read_text())
    grid = Grid(int(meta["n"]), float(meta["R"]), int(meta.get("pad_factor", 1)))
    raw = Path(csv_path).read_text().strip().splitlines()
    if raw[0] != "x,theta,dtheta":
        raise ValueError(f"unexpected profile CSV header: {raw[0]!r}")
    theta = np.array([float(line.split(",")[1]) for line in raw[1:]])
    if theta.size != grid.n:
        raise ValueError("profile CSV length does not match the grid")
    theta_field = Field(grid, theta)
    dtheta = phase_derivative(theta_field)
    return WallProfile(
        theta=theta_field,
        dtheta=dtheta,
        energy=float(meta["energy"]),
        residual_l2=float(meta["residual_l2"]),
        min_slope=float(meta["min_slope"]),
        odd_defect=float(meta.get("odd_defect", 0.0)),
        iterations=int(meta.get("solver", {}).get("iterations", 0)),
    )


def trace_to_csv(trace, path):
    rows = (
        (r.t, r.h1_distance, r.shift, r.kinetic, r.potential, r.dissipation_integral)
        for r in trace
    )
    write_csv(path, "t,h1_distance,shift,kinetic,potential,dissipation_integral", rows)


def eigenvalues_to_csv(path, groups):
    """groups: iterable of (kind_label, complex_or_real_array)."""
    rows = []
    for kind, values in groups:
        for v in np.asarray(values).ravel():
            v = complex(v)
            rows.append((v.real, v.imag, kind))
    write_csv(path, "re,im,kind", rows)


def essential_curve_to_csv(path, xi, roots):
    rows = []
    for x, pair in zip(xi, roots):
        for branch, v in enumerate(pair):
            rows.append((float(x), float(v.real), float(v.imag), branch))
    write_csv(path, "xi,re,im,branch", rows)


def dump_operator(op, bin_path, header_path):
    """Row-major float64 dump of a dense operator plus a JSON header."""
    data = np.ascontiguousarray(op.entries, dtype=np.float64)
    Path(bin_path).write_bytes(data.tobytes())
    write_json(header_path, {
        "kind": op.kind,
        "n": op.n,
        "R": op.grid.half_width,
        "dtype": "float64",
        "order": "row-major",
        "symmetry_defect": op.symmetry_defect,
    })


def write_manifest(path, config_dict: dict, artifacts: dict, timings: dict, checks: dict):
    from . import __version__

    payload = {
        "config": config_dict,
        "artifacts": {name: sha256_file(p) for name, p in artifacts.items()},
        "versions": {
            "package": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "timings": timings,
        "checks": checks,
    }
    write_json(path, payload)
