import json
import subprocess
import sys

import pytest

from logns.cli import EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_OK, SCHEMAS, resolve_config, run_command
from logns.io import ConfigError, read_field_snapshot

from conftest import REFERENCE

SMALL = ["--points-x", "128", "--points-y", "16"]


def manifest(out):
    return json.loads((out / "manifest.json").read_text())


@pytest.fixture(autouse=True)
def no_env_out(monkeypatch):
    monkeypatch.delenv("LOGNS_OUT", raising=False)


class TestResolve:
    def test_precedence(self):
        cfg = resolve_config("groundstate", {"mu": "2.0", "seed": "3"}, {"mu": "5.0"})
        assert cfg["mu"] == 5.0 and cfg["seed"] == 3 and cfg["restarts"] == 4

    def test_env_out(self, monkeypatch, tmp_path):
        monkeypatch.setenv("LOGNS_OUT", str(tmp_path))
        assert resolve_config("oracle", {"out": "elsewhere"}, {})["out"] == str(tmp_path)

    def test_default_out(self):
        assert resolve_config("bounds", {}, {})["out"].endswith("bounds")

    @pytest.mark.parametrize(
        "command,values",
        [("groundstate", {"theta": "-1"}), ("groundstate", {"bogus": "1"}), ("groundstate", {"mu": "nan"}),
         ("groundstate", {"dt0": "1e-7"}), ("groundstate", {"init": "file"}), ("mu-scan", {"mu_min": "10", "mu_max": "1"}),
         ("bounds", {"a_values": "0.5,4"}), ("bounds", {"eps_moll": "0.3", "a_values": "0.5"}),
         ("verify", {"suite": "nope"}), ("groundstate", {"points_x": "7"}), ("evolve", {"lambda_sign": "2"})],
    )
    def test_rejects(self, command, values):
        with pytest.raises(ConfigError):
            resolve_config(command, values, {})

    def test_every_key_has_a_flag(self):
        from logns.cli import build_parser

        parser = build_parser()
        for name, schema in SCHEMAS.items():
            sub = parser._subparsers._group_actions[0].choices[name]
            dests = {a.dest for a in sub._actions}
            assert all(f"key_{k}" in dests for k in schema)


class TestCommands:
    def test_groundstate_gausson_config(self, tmp_path):
        cfg = tmp_path / "gs.cfg"
        cfg.write_text("init = gausson\nmu = 1\n")
        out = tmp_path / "gs"
        assert run_command(["groundstate", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
        m = manifest(out)
        assert abs(m["summary"]["m"] - REFERENCE) < 1e-8
        assert m["format"] == "logns-manifest/1" and m["exit_status"] == 0
        u = read_field_snapshot(out / "groundstate.logns")
        assert u.grid.points_x == 256
        assert (out / "groundstate.csv").read_text().startswith("m,Kx,Ky,")

    def test_groundstate_nonconverged(self, tmp_path):
        out = tmp_path / "gs"
        code = run_command(["groundstate", "--out", str(out), "--max-steps", "1", "--restarts", "1", *SMALL])
        assert code == EXIT_NONCONVERGED
        assert manifest(out)["summary"]["converged"] is False

    def test_negative_theta_leaves_nothing(self, tmp_path):
        out = tmp_path / "bad"
        assert run_command(["groundstate", "--theta", "-1", "--out", str(out)]) == EXIT_CONFIG
        assert not out.exists()

    def test_unknown_command(self):
        assert run_command(["nope"]) == EXIT_CONFIG

    def test_verify_scaling(self, tmp_path):
        out = tmp_path / "v"
        assert run_command(["verify", "--suite", "scaling", "--out", str(out)]) == EXIT_OK
        assert manifest(out)["summary"]["all_passed"]
        assert (out / "verify_scaling.csv").exists()

    def test_oracle(self, tmp_path):
        out = tmp_path / "o"
        assert run_command(["oracle", "--out", str(out)]) == EXIT_OK
        assert manifest(out)["summary"]["lambda"] == pytest.approx(2.0)

    def test_bounds(self, tmp_path):
        out = tmp_path / "b"
        assert run_command(["bounds", "--out", str(out), "--theta", "30", "--r-values", "6"]) == EXIT_OK
        s = manifest(out)["summary"]
        assert s["tent_strict_rows"] == s["tent_rows"] == 7
        assert s["eigen_negative_rows"] == 1 and not s["eigen_window_empty"]

    def test_mu_scan_small(self, tmp_path):
        out = tmp_path / "s"
        args = ["mu-scan", "--out", str(out), "--mu-min", "0.5", "--mu-max", "50", "--mu-count", "5", *SMALL]
        assert run_command(args) == EXIT_OK
        lines = (out / "mu_scan.csv").read_text().splitlines()
        assert lines[0] == "mu,m,Kx,Ky,muKy,lambda,gap,ydep,converged" and len(lines) == 6
        assert manifest(out)["summary"]["case"] == 2

    def test_evolve_small(self, tmp_path):
        out = tmp_path / "e"
        args = ["evolve", "--out", str(out), "--t-end", "0.05", "--dt", "1e-3", "--record-every", "10",
                "--snapshot-every", "2", "--init", "gausson", *SMALL]
        assert run_command(args) == EXIT_OK
        assert len((out / "trajectory.csv").read_text().splitlines()) == 7
        assert sorted(p.name for p in out.glob("snapshot_*.logns")) == [f"snapshot_{k:04d}.logns" for k in range(3)]
        assert manifest(out)["summary"]["max_orbital_distance"] < 1e-2

    def test_file_init_missing(self, tmp_path):
        out = tmp_path / "f"
        code = run_command(["groundstate", "--out", str(out), "--init", "file", "--initial", str(tmp_path / "x")])
        assert code == EXIT_CONFIG
        assert (out / ".failed").exists() and not (out / "manifest.json").exists()

    def test_file_init_round_trip(self, tmp_path):
        first = tmp_path / "a"
        assert run_command(["groundstate", "--out", str(first), "--init", "gausson", "--mu", "10", *SMALL]) == 0
        second = tmp_path / "b"
        args = ["groundstate", "--out", str(second), "--init", "file", "--initial", str(first / "groundstate.logns"),
                "--mu", "10", *SMALL]
        assert run_command(args) == EXIT_OK
        assert manifest(second)["summary"]["steps"] == 0

    def test_rerun_clears_failed_marker(self, tmp_path):
        out = tmp_path / "r"
        run_command(["groundstate", "--out", str(out), "--init", "file", "--initial", str(tmp_path / "x")])
        assert run_command(["oracle", "--out", str(out)]) == EXIT_OK
        assert not (out / ".failed").exists()

    def test_deterministic_bytes(self, tmp_path):
        outs = [tmp_path / "x", tmp_path / "y"]
        for out in outs:
            assert run_command(["groundstate", "--out", str(out), "--restarts", "2", "--mu", "10", *SMALL]) == 0
        for name in ("groundstate.csv", "groundstate.logns"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "logns", "oracle", "--out", str(tmp_path / "o")],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "o" / "oracle.csv").exists()
