import json

import numpy as np
import pytest

from hardyforge import cli
from hardyforge.cli import ConfigError, parse_config, run


MINIMAL_RADIAL = """
subcommand = "radial"
n = 3
potential = "zero"
"""


class TestParseConfig:
    def test_minimal_defaults(self):
        cfg = parse_config(MINIMAL_RADIAL)
        assert cfg.subcommand == "radial"
        assert cfg.params["grid"] == [1e-6, 1e6, 8001]
        assert cfg.params["xi_points"] == 512
        assert cfg.params["xi_span"] == 8.0
        assert cfg.seed == 42

    def test_dimension_must_be_at_least_two(self):
        with pytest.raises(ConfigError, match="dimension must be >= 2"):
            parse_config('subcommand = "radial"\nn = 1\n')

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="foo"):
            parse_config(MINIMAL_RADIAL + 'foo = 1\n')

    def test_missing_required_key(self):
        with pytest.raises(ConfigError, match="'n'"):
            parse_config('subcommand = "radial"\n')

    def test_unknown_subcommand(self):
        with pytest.raises(ConfigError, match="unknown subcommand"):
            parse_config('subcommand = "fly"\n')

    def test_parse_error_reported(self):
        with pytest.raises(ConfigError, match="parse error"):
            parse_config('subcommand = "radial\n')

    def test_field_specs(self):
        g = None
        f = cli.parse_field_spec("constant:2.5", g)
        assert f(np.array([1.0, 7.0]))[1] == 2.5
        p = cli.parse_field_spec("power:0.25,-2", g)
        assert p(np.array([2.0]))[0] == pytest.approx(0.0625)
        assert cli.parse_field_spec("zero", g) is None
        with pytest.raises(ConfigError):
            cli.parse_field_spec("nonsense:1", g)


class TestRun:
    def test_radial_battery_near_pole(self):
        cfg = parse_config(MINIMAL_RADIAL)
        cfg.no_timestamp = True
        rep = run(cfg)
        assert rep["pass"]
        by_name = {c["name"]: c for c in rep["checks"]}
        assert by_name["near_pole_limit"]["value"] == pytest.approx(0.25, abs=1e-6)
        assert by_name["near_pole_limit"]["anchor"]

    def test_verify_battery_classical(self):
        cfg = parse_config('subcommand = "verify"\nn = 3\npair = "classical"\n')
        cfg.no_timestamp = True
        rep = run(cfg)
        names = {c["name"] for c in rep["checks"]}
        assert {"lambda0_annulus", "lambda_infinity_drift",
                "null_criticality_slope", "oscillation_lam_2"} <= names
        assert rep["pass"]

    def test_verify_battery_yukawa(self):
        cfg = parse_config('subcommand = "verify"\nn = 3\npair = "yukawa"\n')
        cfg.no_timestamp = True
        rep = run(cfg)
        names = {c["name"] for c in rep["checks"]}
        assert "lambda_infinity_trend" in names
        assert rep["pass"]

    def test_numerical_failure_becomes_failed_check(self):
        # n = 2 whole space is not subcritical: optimal_pair raises inside
        cfg = parse_config('subcommand = "verify"\nn = 2\npair = "classical"\n')
        cfg.no_timestamp = True
        rep = run(cfg)
        assert not rep["pass"]
        assert rep["checks"][0]["name"] == "battery_execution"


class TestMainAndDeterminism:
    def write(self, tmp_path, text, name="cfg.toml"):
        p = tmp_path / name
        p.write_text(text)
        return p

    def test_exit_zero_and_report_file(self, tmp_path, capsys):
        p = self.write(tmp_path, MINIMAL_RADIAL)
        out = tmp_path / "out"
        rc = cli.main(["radial", "--config", str(p), "--out", str(out), "--no-timestamp"])
        assert rc == 0
        rep = json.loads((out / "report.json").read_text())
        assert rep["pass"]

    def test_exit_two_on_bad_config(self, tmp_path, capsys):
        p = self.write(tmp_path, 'subcommand = "radial"\nn = 1\n')
        rc = cli.main(["radial", "--config", str(p)])
        assert rc == 2
        assert "dimension" in capsys.readouterr().err

    def test_exit_two_on_missing_file(self, tmp_path, capsys):
        rc = cli.main(["radial", "--config", str(tmp_path / "none.toml")])
        assert rc == 2

    def test_subcommand_mismatch(self, tmp_path, capsys):
        p = self.write(tmp_path, MINIMAL_RADIAL)
        rc = cli.main(["verify", "--config", str(p)])
        assert rc == 2

    def test_exit_one_on_failing_check(self, tmp_path, capsys):
        reports = tmp_path / "reports"
        reports.mkdir()
        (reports / "bad.json").write_text(json.dumps({
            "checks": [{"name": "x", "anchor": "a", "value": 2.0,
                        "expected": 1.0, "tol": 0.1, "pass": False}]}))
        p = self.write(tmp_path, f'subcommand = "report"\ndirectory = "{reports}"\n')
        rc = cli.main(["report", "--config", str(p), "--no-timestamp"])
        assert rc == 1

    def test_report_empty_directory_vacuous(self, tmp_path, capsys):
        reports = tmp_path / "empty"
        reports.mkdir()
        p = self.write(tmp_path, f'subcommand = "report"\ndirectory = "{reports}"\n')
        rc = cli.main(["report", "--config", str(p), "--no-timestamp"])
        assert rc == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["pass"] and rep["warnings"]

    def test_byte_identical_reports(self, tmp_path, capsys):
        p = self.write(tmp_path, 'subcommand = "multipolar"\nn = 3\n'
                                 'poles = [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]\n'
                                 'points = 50\n')
        outs = []
        for d in ("a", "b"):
            out = tmp_path / d
            rc = cli.main(["multipolar", "--config", str(p), "--out", str(out),
                           "--seed", "7", "--no-timestamp"])
            assert rc == 0
            outs.append((out / "report.json").read_bytes())
        assert outs[0] == outs[1]
        assert b'"seed": 7' in outs[0]

    def test_timestamp_present_without_flag(self, tmp_path, capsys):
        reports = tmp_path / "empty2"
        reports.mkdir()
        p = self.write(tmp_path, f'subcommand = "report"\ndirectory = "{reports}"\n')
        rc = cli.main(["report", "--config", str(p)])
        rep = json.loads(capsys.readouterr().out)
        assert "timestamp" in rep

    def test_samples_csv_columns(self, tmp_path, capsys):
        p = self.write(tmp_path, MINIMAL_RADIAL + "write_samples = true\n"
                                 "grid = [1e-3, 1e3, 501]\n")
        out = tmp_path / "csvout"
        rc = cli.main(["radial", "--config", str(p), "--out", str(out), "--no-timestamp"])
        assert rc == 0
        lines = (out / "samples.csv").read_text().splitlines()
        assert lines[0] == "r,psi,g0,W"
        assert len(lines) == 502
        first = lines[1].split(",")
        assert float(first[1]) == 1.0                      # psi == 1
        assert float(first[3]) * float(first[0]) ** 2 == pytest.approx(0.25, rel=1e-12)
        # 17 significant digits requested
        assert any(len(tok.split(".")[-1].rstrip("0")) >= 10 for tok in lines[2].split(","))


class TestReportAggregation:
    def test_aggregates_sub_reports(self, tmp_path):
        reports = tmp_path / "agg"
        reports.mkdir()
        for name, ok in [("one", True), ("two", True)]:
            (reports / f"{name}.json").write_text(json.dumps({
                "checks": [{"name": "c", "anchor": "a", "value": 1.0,
                            "expected": 1.0, "tol": 0.0, "pass": ok}]}))
        cfg = parse_config(f'subcommand = "report"\ndirectory = "{reports}"\n')
        cfg.no_timestamp = True
        rep = run(cfg)
        names = sorted(c["name"] for c in rep["checks"])
        assert names == ["one:c", "two:c"]
        assert rep["pass"]
