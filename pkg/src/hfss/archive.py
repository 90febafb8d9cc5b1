"""On-disk trajectory archives: JSON manifest, flat binary snapshots, CSV ledger.

Snapshots are little-endian float64, node-major in the mesh's lexicographic
(i, j, k) domain-node order, one file per stored step, so restart tests can
reload fields bit-exactly. The ledger CSV prints %.17g, which round-trips
float64 exactly. The manifest echoes the full configuration so a run can be
reproduced bit-identically.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import ArchiveError
from .fields import DirectorField
from .flows import Trajectory
from .mesh import BallMesh, build_ball_mesh

ARCHIVE_VERSION = "1"
_FLOAT_FMT = "%.17g"


def serialize_field(values: np.ndarray, mesh: BallMesh) -> bytes:
    nodes = values[mesh.domain]  # lexicographic (i, j, k) order
    return np.ascontiguousarray(nodes, dtype="<f8").tobytes()


def deserialize_field(blob: bytes, mesh: BallMesh) -> np.ndarray:
    expect = mesh.n_nodes * 3 * 8
    if len(blob) != expect:
        raise ArchiveError(
            f"snapshot has {len(blob)} bytes, mesh expects {expect}"
        )
    nodes = np.frombuffer(blob, dtype="<f8").reshape(mesh.n_nodes, 3)
    out = np.zeros((mesh.n, mesh.n, mesh.n, 3))
    out[mesh.domain] = nodes
    return out


def save_field(path: str, field: DirectorField) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_field(field.values, field.mesh))


def load_field(path: str, mesh: BallMesh) -> DirectorField:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise ArchiveError(f"cannot read field file {path}: {exc}") from exc
    return DirectorField(mesh, deserialize_field(blob, mesh))


def _snapshot_name(step: int) -> str:
    return f"step_{step:08d}.bin"


def write_trajectory_archive(dirpath: str, traj: Trajectory,
                             extra: dict | None = None) -> str:
    """Write one trajectory archive; the manifest goes last."""
    os.makedirs(dirpath, exist_ok=True)
    snapdir = os.path.join(dirpath, "snapshots")
    os.makedirs(snapdir, exist_ok=True)
    mesh = traj.mesh
    for m in traj.stored_steps:
        with open(os.path.join(snapdir, _snapshot_name(int(m))), "wb") as fh:
            fh.write(serialize_field(traj.snapshot(m), mesh))

    ledger_path = os.path.join(dirpath, "ledger.csv")
    with open(ledger_path, "w") as fh:
        fh.write("m,t,energy,dissipation\n")
        for m in range(traj.n_steps + 1):
            d = traj.dissipation[m] if m < traj.n_steps else 0.0
            fh.write("%d,%s,%s,%s\n" % (
                m, _FLOAT_FMT % (m * traj.dt), _FLOAT_FMT % traj.energy[m],
                _FLOAT_FMT % d))

    manifest = {
        "version": ARCHIVE_VERSION,
        "mesh": {
            "n": mesh.n,
            "h": mesh.h,
            "n_interior": mesh.n_interior,
            "n_band": mesh.n_band,
            "n_nodes": mesh.n_nodes,
            "hash": mesh.mesh_hash(),
        },
        "scheme": traj.scheme,
        "params": traj.params,
        "dt": traj.dt,
        "n_steps": traj.n_steps,
        "dense_prefix": traj.dense_prefix,
        "stored_steps": [int(m) for m in traj.stored_steps],
        "snapshot_bytes": mesh.n_nodes * 3 * 8,
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(dirpath, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return dirpath


def read_manifest(dirpath: str) -> dict:
    path = os.path.join(dirpath, "manifest.json")
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ArchiveError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ArchiveError(f"corrupt manifest {path}: {exc}") from exc


def read_trajectory_archive(dirpath: str, mesh: BallMesh | None = None):
    """Load an archive back into a Trajectory; verifies hash and byte sizes.

    Returns (trajectory, manifest). Pass the mesh to reuse one already built.
    """
    manifest = read_manifest(dirpath)
    n = int(manifest["mesh"]["n"])
    if mesh is None:
        mesh = build_ball_mesh(n)
    elif mesh.n != n:
        raise ArchiveError(f"archive was written at n={n}, got mesh n={mesh.n}")
    if manifest["mesh"]["hash"] != mesh.mesh_hash():
        raise ArchiveError("mesh hash mismatch; archive written on another layout")

    n_steps = int(manifest["n_steps"])
    stored = [int(m) for m in manifest["stored_steps"]]
    snapshots = {}
    for m in stored:
        path = os.path.join(dirpath, "snapshots", _snapshot_name(m))
        try:
            with open(path, "rb") as fh:
                blob = fh.read()
        except OSError as exc:
            raise ArchiveError(f"missing snapshot {path}") from exc
        snapshots[m] = deserialize_field(blob, mesh)

    energy = np.empty(n_steps + 1)
    dissipation = np.empty(n_steps)
    path = os.path.join(dirpath, "ledger.csv")
    try:
        rows = np.genfromtxt(path, delimiter=",", names=True, dtype=float)
    except OSError as exc:
        raise ArchiveError(f"missing ledger {path}") from exc
    if rows.size != n_steps + 1:
        raise ArchiveError(
            f"ledger has {rows.size} rows, expected {n_steps + 1}"
        )
    energy[:] = rows["energy"]
    dissipation[:] = rows["dissipation"][:-1]

    traj = Trajectory(mesh, float(manifest["dt"]), n_steps, manifest["scheme"],
                      manifest.get("params", {}), stored, snapshots, energy,
                      dissipation, int(manifest.get("dense_prefix", 0)))
    return traj, manifest
