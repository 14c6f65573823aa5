import csv
import json
import os
import subprocess
import sys
from pathlib import Path
from xml.etree import ElementTree

import jsonschema
import pytest

from sgbranch.cli import main, read_config, ConfigError

SCHEMAS = Path(__file__).resolve().parents[1] / "docs" / "schemas"


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


@pytest.fixture(scope="module")
def right_angle(tmp_path_factory):
    out = tmp_path_factory.mktemp("evolve")
    assert main(["evolve", "--theta-deg", "90", "--svg", "--out", str(out)]) == 0
    return out


class TestEvolve:
    def test_csv_header_and_final_row(self, right_angle):
        table = rows(right_angle / "evolve.csv")
        assert list(table[0]) == ["t", "mean_y_plus", "mean_y_minus", "pop_plus", "pop_minus", "overlap", "norm"]
        last = table[-1]
        assert float(last["t"]) == pytest.approx(4.0)
        assert float(last["pop_plus"]) == pytest.approx(0.5, abs=1e-6)
        assert float(last["mean_y_plus"]) == pytest.approx(4.0, rel=0.01)

    def test_json_schema(self, right_angle):
        jsonschema.validate(json.loads((right_angle / "evolve.json").read_text()), schema("evolve_summary"))

    def test_svg_parses(self, right_angle):
        root = ElementTree.parse(right_angle / "evolve.svg").getroot()
        assert root.tag.endswith("svg")
        assert root.findall("{http://www.w3.org/2000/svg}polyline")

    def test_line_endings(self, right_angle):
        data = (right_angle / "evolve.csv").read_bytes()
        assert b"\r" not in data and data.endswith(b"\n")

    def test_aligned_has_no_minus(self, tmp_path):
        assert run(tmp_path, "evolve", "--theta-deg", "0", "--t-final", "1", "--format", "csv") == 0
        assert all(float(r["pop_minus"]) == 0.0 for r in rows(tmp_path / "evolve.csv"))
        assert not (tmp_path / "evolve.json").exists()

    def test_boundary_exit_code(self, tmp_path):
        assert run(tmp_path, "evolve", "--t-final", "20") == 3

    def test_resolution_exit_code(self, tmp_path):
        assert run(tmp_path, "evolve", "--sigma0", "0.0625", "--t-final", "0.1") == 3


class TestBranch:
    def test_naive_n10(self, tmp_path):
        assert run(tmp_path, "branch", "--N", "10", "--mode", "naive", "--svg") == 0
        table = rows(tmp_path / "branch.csv")
        assert list(table[0]) == ["p", "count_exact_num", "count_exact_den", "count_float", "normalized"]
        assert table[5]["count_exact_num"] == "252" and table[5]["count_exact_den"] == "1"
        summary = json.loads((tmp_path / "branch.json").read_text())
        jsonschema.validate(summary, schema("branch_summary"))
        assert summary["total"] == 1024 and summary["peak"] == 5
        ElementTree.parse(tmp_path / "branch.svg")

    def test_half_weight_matches_naive(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["branch", "--N", "10", "--mode", "naive", "--out", str(a)]) == 0
        assert main(["branch", "--N", "10", "--q", "1/2", "--mode", "weighted", "--out", str(b)]) == 0
        assert (a / "branch.csv").read_bytes() == (b / "branch.csv").read_bytes()

    def test_certain_plus(self, tmp_path):
        assert run(tmp_path, "branch", "--N", "10", "--q", "1") == 0
        nonzero = [r for r in rows(tmp_path / "branch.csv") if float(r["count_float"]) != 0]
        assert len(nonzero) == 1 and nonzero[0]["p"] == "10" and nonzero[0]["count_exact_num"] == "1024"

    def test_enumerate_agrees(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["branch", "--N", "9", "--q", "1/3", "--out", str(a), "--format", "csv"]) == 0
        assert main(["branch", "--N", "9", "--q", "1/3", "--enumerate", "--out", str(b), "--format", "csv"]) == 0
        assert (a / "branch.csv").read_bytes() == (b / "branch.csv").read_bytes()

    def test_theta_gives_exact_q(self, tmp_path):
        assert run(tmp_path, "branch", "--N", "4", "--theta-deg", "60") == 0
        assert json.loads((tmp_path / "branch.json").read_text())["q_exact"] == "3/4"

    def test_enumerate_capacity_exit(self, tmp_path):
        assert run(tmp_path, "branch", "--N", "25", "--enumerate") == 2

    def test_q_and_theta_conflict(self, tmp_path):
        assert run(tmp_path, "branch", "--q", "1/2", "--theta-deg", "30") == 2

    def test_bad_q(self, tmp_path):
        assert run(tmp_path, "branch", "--q", "3/2") == 2
        with pytest.raises(SystemExit) as info:
            run(tmp_path, "branch", "--q", "half")
        assert info.value.code == 2


class TestCompare:
    def test_right_angle(self, tmp_path):
        assert run(tmp_path, "compare", "--theta-deg", "90", "--N", "10") == 0
        report = json.loads((tmp_path / "compare.json").read_text())
        jsonschema.validate(report, schema("distribution_report"))
        assert report["tv_naive_weighted"] == 0 and report["tv_exact"] == "0/1"
        assert report["narratives_disagree"] is False

    def test_sixty_degrees(self, tmp_path):
        assert run(tmp_path, "compare", "--theta-deg", "60", "--N", "20", "--svg") == 0
        report = json.loads((tmp_path / "compare.json").read_text())
        assert (report["peak_weighted"], report["peak_naive"]) == (15, 10)
        assert report["narratives_disagree"] is True
        ElementTree.parse(tmp_path / "compare.svg")

    def test_aligned_point_mass(self, tmp_path):
        assert run(tmp_path, "compare", "--theta-deg", "0", "--N", "5") == 0
        report = json.loads((tmp_path / "compare.json").read_text())
        assert report["predicted"] == [0, 0, 0, 0, 0, 1]

    def test_with_samples(self, tmp_path):
        assert run(tmp_path, "compare", "--theta-deg", "120", "--N", "3", "--samples", "5000", "--seed", "4") == 0
        report = json.loads((tmp_path / "compare.json").read_text())
        jsonschema.validate(report, schema("distribution_report"))
        assert abs(report["empirical_plus_frequency"] - 0.25) < report["plus_frequency_error"] * 4 / 3
        assert rows(tmp_path / "compare.csv")[0]["empirical"] != ""


class TestEndToEnd:
    @pytest.mark.parametrize("deg, n, q, peak", [("90", "10", 0.5, 5), ("120", "20", 0.25, 5)])
    def test_reports(self, tmp_path, deg, n, q, peak):
        assert run(tmp_path, "end-to-end", "--theta-deg", deg, "--N", n, "--samples", "2000") == 0
        report = json.loads((tmp_path / "end_to_end.json").read_text())
        jsonschema.validate(report, schema("distribution_report"))
        assert report["q"] == pytest.approx(q, abs=1e-6)
        assert report["peak_weighted"] == peak

    def test_malformed_config(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("theta_degrees 90\n")
        assert run(tmp_path, "end-to-end", "--config", str(cfg)) == 2

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("colour = blue\n")
        assert run(tmp_path, "end-to-end", "--config", str(cfg)) == 2

    def test_missing_config(self, tmp_path):
        assert run(tmp_path, "compare", "--config", str(tmp_path / "nope.cfg")) == 2

    def test_self_check_exit(self, tmp_path, monkeypatch):
        import sgbranch.cli as cli

        monkeypatch.setattr(cli, "CLI_Q_TOLERANCE", -1.0)
        assert run(tmp_path, "end-to-end", "--theta-deg", "90", "--t-final", "0.5") == 4
        assert (tmp_path / "end_to_end.json").exists()


def test_config_file_and_flag_priority(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment line\nN = 6   # trailing comment\nmode = naive\ntheta-degrees = 30\n")
    assert read_config(cfg) == {"N": "6", "mode": "naive", "theta_degrees": "30"}
    out = tmp_path / "o"
    assert main(["branch", "--config", str(cfg), "--N", "8", "--q", "1/4", "--out", str(out)]) == 0
    summary = json.loads((out / "branch.json").read_text())
    assert summary["N"] == 8 and summary["mode"] == "naive" and summary["q_exact"] == "1/4"


def test_read_config_errors(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(" = 3\n")
    with pytest.raises(ConfigError):
        read_config(cfg)


def test_both_theta_forms_rejected(tmp_path):
    assert run(tmp_path, "compare", "--theta-deg", "90", "--theta-rad", "1.0") == 2


def _cli(args, cwd, env):
    return subprocess.run([sys.executable, "-m", "sgbranch", *args], cwd=cwd, env=env, capture_output=True)


def test_environment_does_not_affect_output(tmp_path):
    args = ["compare", "--theta-deg", "60", "--N", "12", "--samples", "1000", "--seed", "3", "--out", "o"]
    base = {k: v for k, v in os.environ.items() if k in ("PATH", "PYTHONPATH", "HOME")}
    noisy = dict(base, PYTHONHASHSEED="123", OMP_NUM_THREADS="3", LC_ALL="C", LANG="de_DE.UTF-8", TZ="Asia/Tokyo")
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    ra = _cli(args, tmp_path / "a", base)
    rb = _cli(args, tmp_path / "b", noisy)
    assert ra.returncode == rb.returncode == 0, ra.stderr + rb.stderr
    for name in ("compare.json", "compare.csv"):
        assert (tmp_path / "a" / "o" / name).read_bytes() == (tmp_path / "b" / "o" / name).read_bytes()
