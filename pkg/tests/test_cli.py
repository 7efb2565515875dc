import json
import math
import os

import pytest

from fdd_mimo.cli import main
from fdd_mimo.results import CSV_COLUMNS


def read_rows(path):
    with open(path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    header = lines[0].split(",")
    return header, [dict(zip(header, line.split(","))) for line in lines[1:]]


class TestFigCommands:
    def test_fig1_writes_csv_and_manifest(self, tmp_path, capsys):
        out = str(tmp_path)
        code = main(
            ["fig1", "--trials", "5", "--seed", "7", "--b-list", "0,100", "--out-dir", out]
        )
        assert code == 0
        header, rows = read_rows(os.path.join(out, "fig1.csv"))
        assert tuple(header) == CSV_COLUMNS
        assert len(rows) == 6  # 2 budgets x 3 schemes
        assert {r["scheme"] for r in rows} == {"bf", "zf", "dp"}
        assert all(r["seed"] == "7" for r in rows)
        assert all(r["experiment"] == "fig1" for r in rows)
        manifest = json.load(open(os.path.join(out, "fig1.manifest.json")))
        assert manifest["seed"] == 7
        assert manifest["experiment"] == "fig1"

    def test_repeat_runs_byte_identical(self, tmp_path):
        out_a, out_b = str(tmp_path / "a"), str(tmp_path / "b")
        args = ["fig1", "--trials", "8", "--seed", "7", "--b-list", "0,40"]
        assert main(args + ["--out-dir", out_a]) == 0
        assert main(args + ["--out-dir", out_b]) == 0
        bytes_a = open(os.path.join(out_a, "fig1.csv"), "rb").read()
        bytes_b = open(os.path.join(out_b, "fig1.csv"), "rb").read()
        assert bytes_a == bytes_b

    def test_manifest_records_linear_snr(self, tmp_path):
        out = str(tmp_path)
        main(["fig1", "--trials", "2", "--seed", "1", "--snr-db", "30",
              "--b-list", "8", "--out-dir", out])
        manifest = json.load(open(os.path.join(out, "fig1.manifest.json")))
        assert manifest["specs"][0]["base"]["snr"] == pytest.approx(1000.0)

    def test_fig3_small_sweep_ratio(self, tmp_path, capsys):
        out = str(tmp_path)
        code = main(
            ["fig3", "--trials", "60", "--seed", "5", "--n-list", "4,128", "--out-dir", out]
        )
        assert code == 0
        err = capsys.readouterr().err
        assert "skipped" in err  # zf/dp invalid at N=4
        _, rows = read_rows(os.path.join(out, "fig3.csv"))
        for label in ("all", "log_ct4", "log_ct8"):
            bf = {float(r["n_rx"]): float(r["sum_rate"])
                  for r in rows if r["scheme"] == "bf" and r["antenna_policy"] == label}
            assert bf[128.0] / bf[4.0] > 5.0


class TestBoundsCommand:
    def test_balancing_ratio_printed(self, capsys):
        assert main(["bounds", "--T", "180", "--nt", "8"]) == 0
        out = capsys.readouterr().out
        assert "balancing_ratio" in out and "22.5" in out

    def test_zero_feedback_floors(self, capsys):
        code = main(
            ["bounds", "--T", "180", "--nt", "8", "--cf", "0", "--cu", "4", "--ct", "8"]
        )
        assert code == 0
        out = capsys.readouterr().out
        for line in out.splitlines():
            if line.startswith("rate_floor"):
                assert float(line.split()[-1]) == 0.0

    def test_dp_floor_is_zf_plus_delta(self, capsys):
        code = main(
            ["bounds", "--T", "180", "--cf-t", "10", "--cu", "4", "--ct", "8", "--json"]
        )
        assert code == 0
        table = json.loads(capsys.readouterr().out)
        delta = table["delta_dp"]
        assert 0.0 < delta < 2.0 - math.log2(math.e)
        assert table["rate_floor_log_nt[dp]"] == pytest.approx(
            table["rate_floor_log_nt[zf]"] + delta
        )

    def test_per_block_conversion(self, capsys):
        code = main(
            ["bounds", "--T", "180", "--cf-t", "10", "--cu", "4", "--per-block", "--json"]
        )
        assert code == 0
        table = json.loads(capsys.readouterr().out)
        assert table["rate_floor_fast_nt_bits_per_block"] == pytest.approx(
            table["rate_floor_fast_nt"] * 180
        )


class TestCustomCommand:
    def write(self, tmp_path, text):
        path = tmp_path / "exp.ini"
        path.write_text(text, encoding="utf-8")
        return str(path)

    def test_minimal_single_point(self, tmp_path, capsys):
        config = self.write(
            tmp_path,
            "[experiment]\ntrials = 1\nseed = 3\nschemes = bf\n\n"
            "[system]\nn_rx = 8\nn_tx = 8\nn_users = 1\nsnr_db = 30\nfeedback_bits = 0\n",
        )
        out = str(tmp_path / "out")
        assert main(["custom", config, "--out-dir", out]) == 0
        _, rows = read_rows(os.path.join(out, "custom.csv"))
        assert len(rows) == 1
        assert rows[0]["scheme"] == "bf"
        assert rows[0]["trials"] == "1"

    def test_invalid_zf_point_skipped_with_warning(self, tmp_path, capsys):
        config = self.write(
            tmp_path,
            "[experiment]\ntrials = 1\nseed = 3\nschemes = zf\n\n"
            "[system]\nn_rx = 16\nn_tx = 8\nn_users = 12\nsnr_db = 30\nfeedback_bits = 40\n",
        )
        out = str(tmp_path / "out")
        code = main(["custom", config, "--out-dir", out])
        captured = capsys.readouterr()
        assert code == 0
        assert "warning" in captured.err and "zf" in captured.err
        _, rows = read_rows(os.path.join(out, "custom.csv"))
        assert rows == []

    def test_malformed_config_names_key(self, tmp_path, capsys):
        config = self.write(
            tmp_path,
            "[experiment]\ntrials = not-a-number\nseed = 3\nschemes = bf\n\n"
            "[system]\nn_rx = 8\nn_tx = 8\nn_users = 1\nsnr_db = 30\nfeedback_bits = 0\n",
        )
        code = main(["custom", config, "--out-dir", str(tmp_path)])
        captured = capsys.readouterr()
        assert code != 0
        assert "trials" in captured.err

    def test_missing_file(self, tmp_path, capsys):
        code = main(["custom", str(tmp_path / "nope.ini"), "--out-dir", str(tmp_path)])
        assert code != 0

    def test_bits_sweep(self, tmp_path):
        config = self.write(
            tmp_path,
            "[experiment]\ntrials = 3\nseed = 4\nschemes = bf, zf\n\n"
            "[system]\nn_rx = 8\nn_tx = 8\nn_users = 4\nsnr_db = 20\nfeedback_bits = 0\n\n"
            "[sweep]\nkind = feedback_bits\nvalues = 0, 40, 80\n",
        )
        out = str(tmp_path / "out")
        assert main(["custom", config, "--out-dir", out]) == 0
        _, rows = read_rows(os.path.join(out, "custom.csv"))
        assert len(rows) == 6
        assert {r["feedback_bits"] for r in rows} == {"0.0", "40.0", "80.0"}
