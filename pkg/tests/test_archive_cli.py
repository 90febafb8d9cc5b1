import json
import os

import numpy as np
import pytest

from hfss.archive import (
    deserialize_field,
    read_trajectory_archive,
    serialize_field,
    write_trajectory_archive,
)
from hfss.errors import ArchiveError
from hfss.cli import main
from hfss.flows import SchemeConfig, run_flow
from hfss.mesh import build_ball_mesh
from hfss.initial_data import bump_map, great_circle_map


def small_trajectory(n=8, steps=24):
    mesh = build_ball_mesh(n)
    a = bump_map(mesh)
    dt = mesh.h**2 / 12.0
    cfg = SchemeConfig("projection", dt, steps * dt, stride=6, dense_prefix=3)
    return mesh, a, run_flow(a, cfg)


def test_field_serialization_round_trip():
    mesh = build_ball_mesh(8)
    values = great_circle_map(mesh).values
    blob = serialize_field(values, mesh)
    assert len(blob) == mesh.n_nodes * 3 * 8
    back = deserialize_field(blob, mesh)
    assert np.array_equal(back[mesh.domain], values[mesh.domain])
    with pytest.raises(ArchiveError):
        deserialize_field(blob[:-8], mesh)


def test_archive_round_trip_bit_exact(tmp_path):
    mesh, a, traj = small_trajectory()
    outdir = write_trajectory_archive(str(tmp_path / "arc"), traj,
                                      {"config": {"n": 8}})
    back, manifest = read_trajectory_archive(outdir, mesh)
    assert np.array_equal(back.energy, traj.energy)
    assert np.array_equal(back.dissipation, traj.dissipation)
    assert np.array_equal(back.stored_steps, traj.stored_steps)
    for m in traj.stored_steps.tolist():
        assert np.array_equal(back.snapshot(m)[mesh.domain],
                              traj.snapshot(m)[mesh.domain])
    assert manifest["mesh"]["hash"] == mesh.mesh_hash()
    assert manifest["snapshot_bytes"] == mesh.n_nodes * 3 * 8


def test_archive_detects_corruption(tmp_path):
    mesh, a, traj = small_trajectory()
    outdir = write_trajectory_archive(str(tmp_path / "arc"), traj)

    manifest_path = os.path.join(outdir, "manifest.json")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    manifest["mesh"]["hash"] = "0" * 64
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh)
    with pytest.raises(ArchiveError):
        read_trajectory_archive(outdir, mesh)


def test_cli_simulate_and_verify(tmp_path):
    out = str(tmp_path / "run")
    code = main(["simulate", "--n", "8", "--horizon", "0.05", "--out", out])
    assert code == 0
    archive = os.path.join(out, "sim-projection")
    assert os.path.exists(os.path.join(archive, "manifest.json"))
    assert main(["verify", archive]) == 0


def test_cli_invalid_dt_fails_fast(tmp_path):
    out = str(tmp_path / "bad")
    code = main(["simulate", "--n", "8", "--dt", "0.5", "--out", out])
    assert code == 2
    assert not os.path.exists(out)  # no partial archive


def test_cli_verify_flags_norm_corruption(tmp_path, capsys):
    out = str(tmp_path / "run")
    assert main(["simulate", "--n", "8", "--horizon", "0.05", "--out", out]) == 0
    archive = os.path.join(out, "sim-projection")
    snapdir = os.path.join(archive, "snapshots")
    target = sorted(os.listdir(snapdir))[-1]
    path = os.path.join(snapdir, target)
    blob = bytearray(open(path, "rb").read())
    doubled = np.frombuffer(bytes(blob), dtype="<f8") * 2.0  # breaks |u| = 1
    with open(path, "wb") as fh:
        fh.write(doubled.astype("<f8").tobytes())
    capsys.readouterr()
    code = main(["verify", archive, "--check", "norm"])
    assert code == 3
    report = json.loads(capsys.readouterr().out)
    assert report["checks"]["norm"]["pass"] is False


def test_cli_verify_corrupt_archive_is_io_error(tmp_path):
    out = str(tmp_path / "run")
    assert main(["simulate", "--n", "8", "--horizon", "0.05", "--out", out]) == 0
    archive = os.path.join(out, "sim-projection")
    snapdir = os.path.join(archive, "snapshots")
    target = sorted(os.listdir(snapdir))[0]
    path = os.path.join(snapdir, target)
    with open(path, "wb") as fh:
        fh.write(b"too short")
    assert main(["verify", archive]) == 4


def test_cli_ensemble_gate_behavior(tmp_path, capsys):
    out = str(tmp_path / "ens")
    cfg = {
        "n": 8,
        "horizon": 0.05,
        "datum": {"name": "great-circle"},
        "schemes": ["constant", "projection"],
        "out": out,
    }
    cfg_path = str(tmp_path / "cfg.json")
    with open(cfg_path, "w") as fh:
        json.dump(cfg, fh)
    assert main(["ensemble", "--config", cfg_path]) == 0
    manifest = json.load(open(os.path.join(out, "solution_set.json")))
    assert manifest["members"] == ["00-constant", "01-projection"]
    assert manifest["rejected"] == {}
    assert set(manifest["functional_values"]) == {"00-constant", "01-projection"}

    # non-harmonic datum: the constant path is gated out with a diagnostic
    cfg["datum"] = {"name": "bump"}
    cfg["out"] = out + "2"
    with open(cfg_path, "w") as fh:
        json.dump(cfg, fh)
    assert main(["ensemble", "--config", cfg_path]) == 0
    manifest = json.load(open(os.path.join(out + "2", "solution_set.json")))
    assert manifest["members"] == ["01-projection"]
    assert "00-constant" in manifest["rejected"]


def test_cli_select_distinct_enumerations(tmp_path):
    out = str(tmp_path / "sel")
    cfg = {
        "n": 8,
        "horizon": 20.0,
        "datum": {"name": "equator"},
        "schemes": ["constant", "projection"],
        "stride": 192,
        "selection": {"aligned_first": "+", "enforce_tail_bound": True},
        "out": out,
    }
    cfg_path = str(tmp_path / "cfg.json")
    with open(cfg_path, "w") as fh:
        json.dump(cfg, fh)
    assert main(["select", "--config", cfg_path,
                 "--enumeration", "flip-first"]) == 0
    result = json.load(open(os.path.join(out, "select_transcript.json")))
    assert result["selection"]["selected_label"] == "00-constant"
    assert result["second_enumeration"]["selected_label"] == "01-projection"
    assert result["distinctness"]["distinct"] is True
    assert os.path.exists(os.path.join(out, "selected", "manifest.json"))


def test_cli_rejects_unknown_check(tmp_path):
    out = str(tmp_path / "run")
    assert main(["simulate", "--n", "8", "--horizon", "0.05", "--out", out]) == 0
    code = main(["verify", os.path.join(out, "sim-projection"),
                 "--check", "nonsense"])
    assert code == 2
