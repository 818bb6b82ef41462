"""Command-line interface: exit codes, report envelopes, and formats."""

import json
import math

import pytest

from ffgap.cli import (
    EXIT_ERROR,
    EXIT_INCONCLUSIVE,
    EXIT_OK,
    main,
    parse_sizes,
    resolve_model,
)
from ffgap.coefficients import threshold_1d
from ffgap.models import save


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


class TestParseSizes:
    def test_forms(self):
        assert parse_sizes("6") == (6,)
        assert parse_sizes("4..7") == (4, 5, 6, 7)
        assert parse_sizes("4,6,8") == (4, 6, 8)


class TestResolveModel:
    def test_builtin_names(self):
        assert resolve_model("aklt").name == "aklt"
        assert resolve_model("singlet").name == "singlet_chain"
        assert resolve_model("commuting2d").kind == "cell_2d"

    def test_random_recipe(self):
        spec = resolve_model("random:d=2,rank_bulk=1,rank_boundary=0,seed=9", 4)
        assert spec.kind == "chain"
        assert spec.payload.d == 2

    def test_model_file(self, tmp_path, random_chain_d2):
        path = tmp_path / "model.json"
        save(random_chain_d2, path)
        spec = resolve_model(str(path), 4)
        assert spec.kind == "chain"


class TestGapCommand:
    def test_singlet_cosine_gaps(self, capsys):
        code, doc = run_json(
            capsys, "--no-timestamp", "gap", "--model", "singlet", "--sizes", "2..4"
        )
        assert code == EXIT_OK
        gaps = {entry["m"]: entry["gap"] for entry in doc["result"]["gaps"]}
        for m in (2, 3, 4):
            assert gaps[m] == pytest.approx(1.0 - math.cos(math.pi / m), abs=1e-10)

    def test_envelope_fields(self, capsys):
        code, doc = run_json(
            capsys, "--no-timestamp", "gap", "--model", "singlet", "--sizes", "2,3"
        )
        assert doc["schema_version"] == 1
        assert doc["tool"]["name"] == "ffgap"
        assert doc["config"]["command"] == "gap"
        assert doc["config"]["sizes"] == [2, 3]
        assert "timestamp" not in doc

    def test_timestamp_present_by_default(self, capsys):
        code, doc = run_json(capsys, "gap", "--model", "singlet", "--sizes", "2")
        assert "timestamp" in doc

    def test_oversized_window_fails(self, capsys):
        code, out = run(
            capsys, "gap", "--model", "aklt", "--sizes", "12"
        )  # 3^12 > 2^15 cap
        assert code == EXIT_ERROR


class TestCertifyCommand:
    def test_aklt_certified_exit_zero(self, capsys):
        code, doc = run_json(
            capsys,
            "--no-timestamp",
            "certify",
            "thm1",
            "--model",
            "aklt",
            "--n",
            "5",
        )
        assert code == EXIT_OK
        cert = doc["result"]
        assert cert["verdict"] == "certified_gapped"
        assert cert["bound"] > 0
        assert cert["model"] == "aklt"
        assert cert["threshold"] == pytest.approx(threshold_1d(5, "exact"))

    def test_singlet_inconclusive_exit_two(self, capsys):
        code, doc = run_json(
            capsys,
            "--no-timestamp",
            "certify",
            "thm1",
            "--model",
            "singlet",
            "--n",
            "6",
        )
        assert code == EXIT_INCONCLUSIVE
        assert doc["result"]["verdict"] == "inconclusive"

    def test_gm_periodic(self, capsys):
        code, doc = run_json(
            capsys,
            "--no-timestamp",
            "certify",
            "gm",
            "--model",
            "aklt",
            "--n",
            "5",
            "--m",
            "12",
        )
        assert code == EXIT_OK
        cert = doc["result"]
        assert cert["criterion"] == "gm_periodic"
        assert cert["threshold"] == pytest.approx(0.2)

    def test_quasi1d_commuting_cell(self, capsys):
        code, doc = run_json(
            capsys,
            "--no-timestamp",
            "certify",
            "quasi1d",
            "--model",
            "commuting2d",
            "--n",
            "4",
            "--m2",
            "1",
            "--R",
            "1",
        )
        assert code == EXIT_INCONCLUSIVE
        cert = doc["result"]
        assert cert["local_gap"] == pytest.approx(1.0)
        assert cert["constants"]["C1_1d"] == pytest.approx(0.5)


class TestThresholdsCommand:
    def test_csv_columns_and_values(self, capsys):
        code, out = run(capsys, "thresholds", "--n", "4..9")
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        header = lines[0].split(",")
        assert header == [
            "n",
            "G_exact_1d",
            "G_asymptotic_1d",
            "F_lower",
            "G_2d",
            "G_2d_times_n32",
        ]
        rows = {line.split(",")[0]: line.split(",") for line in lines[1:]}
        assert len(rows) == 6
        g8 = float(rows["8"][1])
        assert math.ceil(g8 * 1e4) / 1e4 == pytest.approx(0.1238)
        assert rows["5"][4] == ""  # no 2D threshold at odd n

    def test_json_format(self, capsys):
        code, doc = run_json(
            capsys, "--no-timestamp", "thresholds", "--n", "4,6", "--format", "json"
        )
        assert code == EXIT_OK
        rows = doc["result"]["rows"]
        assert [r["n"] for r in rows] == [4, 6]
        assert rows[0]["G_exact_1d"] == pytest.approx(threshold_1d(4, "exact"))


class TestVerifyCommand:
    def test_small_suite_passes(self, capsys):
        code, doc = run_json(
            capsys, "--no-timestamp", "verify", "--suite", "1d", "--seed", "7", "--trials", "2"
        )
        assert code == EXIT_OK
        assert doc["result"]["pass"] is True
        assert len(doc["result"]["instances"]) == 2


class TestCoarseGrainCommand:
    def test_two_d_summary(self, capsys):
        code, doc = run_json(
            capsys,
            "--no-timestamp",
            "coarse-grain",
            "--model",
            "commuting2d",
            "--R",
            "1",
            "--two-d",
        )
        assert code == EXIT_OK
        result = doc["result"]
        assert result["geometry"] == "2d"
        assert result["C1"] == pytest.approx(0.25)
        assert result["C2"] == pytest.approx(4.0)

    def test_quasi1d_needs_m2(self, capsys):
        code, out = run(
            capsys, "coarse-grain", "--model", "commuting2d", "--R", "1"
        )
        assert code == EXIT_ERROR


class TestReproducibility:
    def test_no_timestamp_byte_identical(self, capsys):
        _, first = run(
            capsys, "--no-timestamp", "profile", "--model", "aklt", "--n", "4"
        )
        _, second = run(
            capsys, "--no-timestamp", "profile", "--model", "aklt", "--n", "4"
        )
        assert first == second

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "report.json"
        code, out = run(
            capsys,
            "--no-timestamp",
            "--output",
            str(path),
            "profile",
            "--model",
            "singlet",
            "--n",
            "3",
        )
        assert code == EXIT_OK
        assert out == ""
        doc = json.loads(path.read_text())
        assert doc["result"]["n"] == 3


class TestErrors:
    def test_missing_model_file(self, capsys):
        code, out = run(capsys, "profile", "--model", "/nonexistent.json", "--n", "4")
        assert code == EXIT_ERROR

    def test_error_json_flag(self, capsys):
        code, out = run(
            capsys,
            "--error-json",
            "profile",
            "--model",
            "/nonexistent.json",
            "--n",
            "4",
        )
        assert code == EXIT_ERROR
        doc = json.loads(out)
        assert "error" in doc

    def test_kind_mismatch(self, capsys):
        code, out = run(capsys, "profile", "--model", "commuting2d", "--n", "4")
        assert code == EXIT_ERROR
