import csv
import json
import struct

import numpy as np
import pytest

from nslb.cli import main
from nslb.snapshots import MAGIC, VERSION, SnapshotError, read_snapshot, write_snapshot
from nslb.spectral import PhysicalField, TorusGrid


def write_config(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


SIMULATE_CFG = """
[grid]
n = 2
N = 32

[physics]
initial = taylor-green
amplitude = 1.0
nu = 0.1
dt = 0.001
t_end = 0.1
snapshot_stride = 10

[output]
snapshots = true
"""


def test_snapshot_round_trip_bit_exact(tmp_path):
    grid = TorusGrid(2, 16)
    rng = np.random.default_rng(0)
    field = PhysicalField(grid, rng.standard_normal((2,) + grid.shape))
    path = tmp_path / "state.nslb"
    write_snapshot(path, field, 0.375)
    back, t = read_snapshot(path)
    assert t == 0.375
    assert back.values.tobytes() == field.values.tobytes()
    # write-read-write reproduces the file byte for byte
    path2 = tmp_path / "state2.nslb"
    write_snapshot(path2, back, t)
    assert path.read_bytes() == path2.read_bytes()


def test_snapshot_truncation_rejected(tmp_path):
    grid = TorusGrid(2, 16)
    field = PhysicalField(grid, np.zeros((1,) + grid.shape))
    path = tmp_path / "state.nslb"
    write_snapshot(path, field, 0.0)
    raw = path.read_bytes()
    (tmp_path / "short.nslb").write_bytes(raw[:-17])
    with pytest.raises(SnapshotError, match="byte offset"):
        read_snapshot(tmp_path / "short.nslb")


def test_snapshot_bad_magic_and_version(tmp_path):
    grid = TorusGrid(2, 16)
    field = PhysicalField(grid, np.zeros((1,) + grid.shape))
    path = tmp_path / "state.nslb"
    write_snapshot(path, field, 0.0)
    raw = bytearray(path.read_bytes())
    bad_magic = bytearray(raw)
    bad_magic[:4] = b"XXXX"
    (tmp_path / "bad_magic.nslb").write_bytes(bytes(bad_magic))
    with pytest.raises(SnapshotError, match="magic"):
        read_snapshot(tmp_path / "bad_magic.nslb")
    bumped = bytearray(raw)
    bumped[4:8] = struct.pack("<I", VERSION + 1)
    (tmp_path / "bumped.nslb").write_bytes(bytes(bumped))
    with pytest.raises(SnapshotError, match="version"):
        read_snapshot(tmp_path / "bumped.nslb")
    assert raw[:4] == MAGIC


def test_simulate_experiment_outputs(tmp_path):
    cfg = write_config(tmp_path, SIMULATE_CFG)
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg), "--out", str(out), "--seed", "3"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["checks"]["energy_monotone"]
    assert report["seed"] == 3
    with open(out / "timeseries.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    energies = [float(r["energy"]) for r in rows]
    assert all(a >= b for a, b in zip(energies, energies[1:]))
    assert set(rows[0]) == {"time", "energy", "enstrophy", "divergence_max", "sobolev_h1", "sobolev_h2"}
    snaps = sorted(out.glob("state_*.nslb"))
    assert snaps
    field, t0 = read_snapshot(snaps[0])
    assert field.grid.N == 32 and t0 == 0.0


def test_reports_byte_identical_for_same_seed(tmp_path):
    cfg = write_config(
        tmp_path,
        """
[fitting]
noise = 0.05
samples = 120
lambdas = 0.2 0.7
mus = 0.1 0.3
""",
    )
    out_a, out_b, out_c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert main(["fit-singularity", "--config", str(cfg), "--out", str(out_a), "--seed", "11"]) == 0
    assert main(["fit-singularity", "--config", str(cfg), "--out", str(out_b), "--seed", "11"]) == 0
    assert (out_a / "report.json").read_bytes() == (out_b / "report.json").read_bytes()
    # a different seed moves the noisy fits
    assert main(["fit-singularity", "--config", str(cfg), "--out", str(out_c), "--seed", "12"]) == 0
    assert (out_a / "report.json").read_bytes() != (out_c / "report.json").read_bytes()


def test_missing_field_exits_2(tmp_path, capsys):
    cfg = write_config(tmp_path, "[grid]\nn = 2\nN = 32\n\n[physics]\ndt = 0.001\nt_end = 0.1\n")
    code = main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert code == 2
    err = capsys.readouterr().err
    assert "[physics] nu" in err


def test_unparseable_value_exits_2(tmp_path, capsys):
    cfg = write_config(
        tmp_path, "[grid]\nn = 2\nN = 32\n\n[physics]\nnu = fast\ndt = 0.001\nt_end = 0.1\n"
    )
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 2
    assert "nu" in capsys.readouterr().err


def test_missing_config_file_exits_2(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "nope.cfg")]) == 2


def test_assertion_failure_exits_1(tmp_path, capsys):
    # an unresolvably coarse fit tolerance forces a named assertion failure
    cfg = write_config(
        tmp_path,
        """
[fitting]
noise = 0.3
samples = 40
tolerance = 0.0001
lambdas = 0.7
mus = 0.3
""",
    )
    code = main(["fit-singularity", "--config", str(cfg), "--out", str(tmp_path / "out"), "--seed", "1"])
    assert code == 1
    assert "assertion failed" in capsys.readouterr().err


def test_report_constants_carry_provenance(tmp_path):
    cfg = write_config(tmp_path, "[fitting]\nsamples = 120\nlambdas = 0.2\nmus = 0.1\n")
    out = tmp_path / "out"
    assert main(["fit-singularity", "--config", str(cfg), "--out", str(out), "--seed", "0"]) == 0
    report = json.loads((out / "report.json").read_text())
    gates = report["gates"]
    assert gates["velocity_mu_limit"] == {"value": 0.375, "provenance": "paper-window"}
    assert report["cases"][0]["lambda_fit"]["provenance"] == "measured"
    # no timestamps inside the deterministic report; clock lives in the sidecar
    assert "timestamp" not in json.dumps(report)
    meta = json.loads((out / "report.meta.json").read_text())
    assert "timestamp" in meta
