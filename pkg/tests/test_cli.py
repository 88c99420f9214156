import json

import numpy as np
import pytest

from qsm import cli
from qsm.exceptions import NonConvergence


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestTfimCommands:
    def test_ground_energy_value(self, capsys):
        code, out, _ = run_cli(capsys, "tfim", "free-energy", "--J", "1", "--B", "1", "--ground")
        assert code == 0
        row = out.strip().splitlines()[-1].split(",")
        assert float(row[2]) == pytest.approx(-4.0 / np.pi, abs=1e-9)

    def test_finite_beta_value(self, capsys):
        code, out, _ = run_cli(capsys, "tfim", "free-energy", "--J", "1", "--B", "0", "--beta", "1")
        assert code == 0
        row = out.strip().splitlines()[-1].split(",")
        assert float(row[2]) == pytest.approx(-np.log(2 * np.cosh(1.0)), abs=1e-12)

    def test_invalid_field_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "tfim", "free-energy", "--J", "1", "--B", "-1", "--beta", "1")
        assert code == 2
        assert "error" in err

    def test_missing_beta_exits_2(self, capsys):
        code, _, _ = run_cli(capsys, "tfim", "free-energy", "--B", "1")
        assert code == 2

    def test_unknown_flag_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["tfim", "free-energy", "--B", "1", "--nope"])
        assert exc.value.code == 2

    def test_correlation_free_case(self, capsys):
        code, out, _ = run_cli(capsys, "tfim", "correlation", "--k", "0", "--n-max", "5")
        assert code == 0
        rows = [line.split(",") for line in out.strip().splitlines()[5:]]
        assert all(float(r[1]) == pytest.approx(1.0, abs=1e-12) for r in rows)

    def test_correlation_approaches_limit(self, capsys):
        code, out, _ = run_cli(capsys, "tfim", "correlation", "--k", "0.6", "--n-max", "20")
        assert code == 0
        last = out.strip().splitlines()[-1].split(",")
        assert float(last[1]) == pytest.approx(0.8944271909999159, abs=1e-3)

    def test_correlation_disordered_branch(self, capsys):
        code, out, _ = run_cli(capsys, "tfim", "correlation", "--k", "1.2", "--n-max", "64")
        assert code == 0
        assert float(out.strip().splitlines()[-1].split(",")[1]) < 1e-3

    def test_scan_rows_and_thread_stability(self, capsys):
        args = ["tfim", "free-energy", "--B", "0", "--beta", "2", "--scan-B", "0", "2", "5"]
        code, out1, _ = run_cli(capsys, *args, "--threads", "1")
        assert code == 0
        code, out2, _ = run_cli(capsys, *args, "--threads", "3")
        assert code == 0
        rows = lambda text: [ln for ln in text.splitlines() if not ln.startswith("#")][1:]
        assert rows(out1) == rows(out2)
        assert len(rows(out1)) == 5


class TestSphericalCommand:
    @pytest.mark.parametrize(
        "b,d,expected", [("5", "1", -5.0), ("0", "3", -3.0), ("1", "1", -1.25)]
    )
    def test_ground_closed_points(self, capsys, b, d, expected):
        code, out, _ = run_cli(capsys, "spherical", "--J", "1", "--d", d, "--B", b, "--ground")
        assert code == 0
        row = out.strip().splitlines()[-1].split(",")
        assert float(row[4]) == pytest.approx(expected, abs=1e-6)

    def test_edge_status_reported(self, capsys):
        _, out, _ = run_cli(capsys, "spherical", "--J", "1", "--d", "1", "--B", "1", "--ground")
        assert out.strip().splitlines()[-1].endswith("edge")
        _, out, _ = run_cli(capsys, "spherical", "--J", "1", "--d", "1", "--B", "5", "--ground")
        assert out.strip().splitlines()[-1].endswith("ok")

    def test_finite_mode_needs_side(self, capsys):
        code, _, err = run_cli(capsys, "spherical", "--B", "1", "--beta", "2", "--mode", "finite")
        assert code == 2
        assert "--L" in err

    def test_finite_beta_row(self, capsys):
        code, out, _ = run_cli(
            capsys, "spherical", "--B", "5", "--beta", "40", "--mode", "finite", "--L", "16"
        )
        assert code == 0
        row = out.strip().splitlines()[-1].split(",")
        assert float(row[4]) == pytest.approx(-4.87, abs=0.05)


class TestOracleCommands:
    def test_tfim_ed_pass(self, capsys):
        code, out, _ = run_cli(
            capsys, "oracle", "tfim-ed", "--L", "10", "--B", "0.5", "--beta", "20",
            "--corr-dist", "2",
        )
        assert code == 0
        body = [ln for ln in out.splitlines() if not ln.startswith("#")]
        assert body[1].split(",")[-1] == "pass"
        assert body[2].split(",")[-1] == "pass"

    def test_tfim_ed_mismatch_exits_4(self, capsys):
        code, out, _ = run_cli(
            capsys, "oracle", "tfim-ed", "--L", "4", "--B", "0.5", "--beta", "20",
            "--tol", "1e-8",
        )
        assert code == 4
        assert out.strip().splitlines()[-1].endswith("fail")

    def test_spherical_contour_pass(self, capsys):
        code, out, _ = run_cli(
            capsys, "oracle", "spherical-contour", "--d", "1", "--L", "4",
            "--beta", "0.5", "--J", "1", "--B", "1", "--H", "0.5",
        )
        assert code == 0
        assert out.strip().splitlines()[-1].endswith("pass")

    def test_spherical_mc_pass_and_inconclusive(self, capsys):
        code, out, _ = run_cli(
            capsys, "oracle", "spherical-mc", "--samples", "200000", "--seed", "11",
        )
        assert code == 0
        assert out.strip().splitlines()[-1].endswith("pass")
        with pytest.warns(UserWarning):
            code, out, _ = run_cli(
                capsys, "oracle", "spherical-mc", "--samples", "200", "--seed", "11",
            )
        assert code == 0
        assert out.strip().splitlines()[-1].endswith("inconclusive")


class TestOutputContract:
    def test_csv_metadata_header(self, capsys):
        _, out, _ = run_cli(capsys, "tfim", "correlation", "--k", "0.3", "--n-max", "3")
        lines = out.splitlines()
        assert lines[0].startswith("# qsm ")
        assert lines[1] == "# command: tfim correlation"
        assert lines[2].startswith("# config: ")
        assert lines[3].startswith("# columns: ")
        json.loads(lines[2].removeprefix("# config: "))

    def test_byte_identical_reruns(self, capsys):
        args = ("spherical", "--B", "2", "--H", "0.01", "--beta", "3", "--scan-B", "0", "4", "7")
        _, out1, _ = run_cli(capsys, *args)
        _, out2, _ = run_cli(capsys, *args)
        assert out1 == out2

    def test_json_mirrors_csv_schema(self, capsys):
        _, csv_out, _ = run_cli(capsys, "tfim", "correlation", "--k", "0.5", "--n-max", "4")
        _, json_out, _ = run_cli(
            capsys, "tfim", "correlation", "--k", "0.5", "--n-max", "4", "--format", "json"
        )
        payload = json.loads(json_out)
        csv_rows = [ln.split(",") for ln in csv_out.splitlines() if not ln.startswith("#")][1:]
        assert payload["columns"] == ["n[sites]", "det_value[1]", "szego_limit[1]"]
        assert len(payload["rows"]) == len(csv_rows) == 4
        for jrow, crow in zip(payload["rows"], csv_rows):
            assert float(jrow[1]) == float(crow[1])

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "rows.csv"
        code, out, _ = run_cli(
            capsys, "tfim", "free-energy", "--B", "1", "--ground", "--out", str(target)
        )
        assert code == 0
        assert out == ""
        assert target.read_text().startswith("# qsm ")

    def test_floats_roundtrip_exactly(self, capsys):
        _, out, _ = run_cli(capsys, "tfim", "free-energy", "--B", "1", "--ground")
        printed = out.strip().splitlines()[-1].split(",")[2]
        from qsm.ising_chain import ground_energy

        assert float(printed) == ground_energy(1.0, 1.0)[0]


class TestCheckCommand:
    def test_filtered_check_passes(self, capsys):
        code, out, _ = run_cli(capsys, "check", "--filter", "1-tfim")
        assert code == 0
        assert "PASS  1-tfim-ground-closed-points" in out

    def test_no_matching_filter_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "check", "--filter", "zzz")
        assert code == 2

    def test_mutation_is_caught(self, capsys):
        code, out, _ = run_cli(
            capsys, "check", "--filter", "1-tfim", "--mutate", "dispersion-sign"
        )
        assert code == 1
        assert "FAIL" in out

    def test_nonconvergence_exit_code(self, capsys, monkeypatch):
        def boom(params, spec=None):
            raise NonConvergence("synthetic")

        monkeypatch.setattr(cli.ising_chain, "free_energy", boom)
        code, _, err = run_cli(capsys, "tfim", "free-energy", "--B", "1", "--beta", "1")
        assert code == 3
        assert "synthetic" in err
