import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from discreg.cli import main, read_counts
from discreg.errors import ConfigError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def small_benchmark(tmp_path):
    text = (CONFIGS / "benchmark.ini").read_text()
    text = text.replace("n_datasets = 200", "n_datasets = 2").replace("eps_grid = 0:1:0.05", "eps_grid = 0:1:0.5")
    p = tmp_path / "benchmark.ini"
    p.write_text(text)
    return p


def counts_file(tmp_path, rows, header="s,a,s_next,count"):
    p = tmp_path / "counts.csv"
    p.write_text("\n".join([header] + rows) + "\n")
    return p


def parse_table(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestSweep:
    def test_benchmark_schema(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        assert main(["sweep", str(small_benchmark(tmp_path)), "-o", str(out), "-q"]) == 0
        rows = list(csv.DictReader(out.open()))
        assert {r["method"] for r in rows} == {"discount_reg", "uniform_prior", "sa_specific"}
        assert {r["env"] for r in rows} == {"random_chain", "river_swim", "loop"}

    def test_byte_identical_and_thread_independent(self, tmp_path):
        cfg = small_benchmark(tmp_path)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["sweep", str(cfg), "-o", str(a), "-q", "--seed", "3"])
        main(["sweep", str(cfg), "-o", str(b), "-q", "--seed", "3", "--threads", "2"])
        assert a.read_bytes() == b.read_bytes()

    def test_json_and_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("DISCREG_OUTPUT_DIR", str(tmp_path / "outdir"))
        cfg = small_benchmark(tmp_path)
        assert main(["sweep", str(cfg), "--format", "json", "-q"]) == 0
        payload = json.loads((tmp_path / "outdir" / "benchmark.json").read_text())
        assert payload["columns"][-1] == "loss" and len(payload["config"]) == 3

    def test_state_specific(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["state-specific", str(small_benchmark(tmp_path)), "-o", str(out), "-q"]) == 0
        assert {r["method"] for r in csv.DictReader(out.open())} == {"sa_specific"}

    def test_missing_config(self, tmp_path, capsys):
        assert main(["sweep", str(tmp_path / "absent.ini")]) == 2
        assert "absent.ini" in capsys.readouterr().err

    def test_bad_config_has_line(self, tmp_path, capsys):
        p = tmp_path / "bad.ini"
        p.write_text("[env]\nkind = river_swim\n[method.x]\nmethod = bogus\n")
        assert main(["sweep", str(p)]) == 2
        assert "bad.ini:3" in capsys.readouterr().err


class TestTheoremCheck:
    def test_passes(self, capsys):
        assert main(["theorem-check", "--n-trials", "30", "--seed", "4"]) == 0
        out = capsys.readouterr().out
        assert "30/30" in out and out.count("PASS") == 30
        assert "V_discount" in out

    def test_zero_trials_is_usage_error(self):
        assert main(["theorem-check", "--n-trials", "0"]) == 2

    def test_failure_dumps_counterexample(self, monkeypatch, capsys):
        import discreg.cli as cli
        real = cli.run_theorem_check

        def broken(n, seed):
            trials = real(n, seed)
            trials[1].passed = False
            return trials
        monkeypatch.setattr(cli, "run_theorem_check", broken)
        assert main(["theorem-check", "--n-trials", "3", "--brief"]) == 1
        out = capsys.readouterr().out
        assert "counterexample" in out and "policy (averaged)" in out


class TestEpsStar:
    def test_hand_row(self, tmp_path, capsys):
        p = counts_file(tmp_path, ["0,0,0,3", "0,0,1,1", "1,1,1,5"])
        assert main(["eps-star", "--counts", str(p)]) == 0
        rows = parse_table(capsys.readouterr().out)
        r00 = rows[0]
        assert float(r00["K"]) == 3 and float(r00["eps_star"]) == pytest.approx(3 / 7)
        assert float(rows[3]["eps_star"]) == 0.0  # deterministic row
        assert float(rows[1]["eps_star"]) == 1.0  # no data

    def test_all_zero_counts(self, tmp_path, capsys):
        p = counts_file(tmp_path, ["0,0,0,0", "2,1,2,0"])
        assert main(["eps-star", "--counts", str(p), "--plugin", "posterior"]) == 0
        assert all(float(r["eps_star"]) == 1.0 for r in parse_table(capsys.readouterr().out))

    def test_posterior_seeded(self, tmp_path, capsys):
        p = counts_file(tmp_path, ["0,0,0,3", "0,0,1,1", "1,0,1,2", "1,1,0,4"])
        main(["eps-star", "--counts", str(p), "--plugin", "posterior", "--seed", "5"])
        first = capsys.readouterr().out
        main(["eps-star", "--counts", str(p), "--plugin", "posterior", "--seed", "5"])
        assert capsys.readouterr().out == first

    @pytest.mark.parametrize("rows, header, msg", [
        (["0,0,1"], "s,a,s_next,count", ":2:"),
        (["0,0,x,1"], "s,a,s_next,count", ":2:"),
        (["0,0,0,-1"], "s,a,s_next,count", ":2:"),
        (["0,0,0,1"], "s,a,count", ":1:"),
    ])
    def test_malformed(self, tmp_path, capsys, rows, header, msg):
        p = counts_file(tmp_path, rows, header)
        assert main(["eps-star", "--counts", str(p)]) == 2
        assert msg in capsys.readouterr().err

    def test_read_counts_shape(self, tmp_path):
        p = counts_file(tmp_path, ["0,1,2,4", "0,1,2,1"])
        c = read_counts(p)
        assert c.shape == (3, 2, 3) and c[0, 1, 2] == 5
        with pytest.raises(ConfigError):
            read_counts(p, n_states=2)


class TestImpliedPrior:
    def test_hand_value(self, tmp_path, capsys):
        rows = [f"{s},0,0,20" for s in range(10)]
        p = counts_file(tmp_path, rows)
        assert main(["implied-prior", "--gamma", "0.99", "--gamma-p", "0.9", "--counts", str(p),
                     "--n-states", "10"]) == 0
        table = parse_table(capsys.readouterr().out)
        assert all(float(r["alpha_i"]) == pytest.approx(0.2) for r in table)

    def test_no_discounting(self, tmp_path, capsys):
        p = counts_file(tmp_path, ["0,0,1,4", "1,0,0,2"])
        main(["implied-prior", "--gamma", "0.9", "--gamma-p", "0.9", "--counts", str(p)])
        assert all(float(r["sum_alpha"]) == 0 for r in parse_table(capsys.readouterr().out))

    def test_zero_gamma_p(self, tmp_path, capsys):
        p = counts_file(tmp_path, ["0,0,1,4"])
        assert main(["implied-prior", "--gamma", "0.9", "--gamma-p", "0", "--counts", str(p)]) == 2
        assert "infinite magnitude" in capsys.readouterr().err

    def test_curve(self, capsys):
        assert main(["implied-prior", "--gamma", "0.99", "--curve", "--n-states", "10",
                     "--n-obs", "20"]) == 0
        a = np.array([float(r["alpha_i"]) for r in parse_table(capsys.readouterr().out)])
        assert np.all(np.diff(a) < 0) and a[-1] == 0

    def test_range_error(self, tmp_path):
        p = counts_file(tmp_path, ["0,0,1,4"])
        assert main(["implied-prior", "--gamma", "0.9", "--gamma-p", "0.95", "--counts", str(p)]) == 2


class TestQlearnAndDump:
    def test_trace_export(self, tmp_path):
        out = tmp_path / "q.csv"
        assert main(["qlearn", "--episodes", "4", "--steps", "10", "--runs", "2", "-o", str(out), "-q"]) == 0
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 8 and "episode_reward" in rows[0]
        again = tmp_path / "q2.csv"
        main(["qlearn", "--episodes", "4", "--steps", "10", "--runs", "2", "-o", str(again), "-q"])
        assert out.read_bytes() == again.read_bytes()

    def test_constant_prob_needs_p(self, tmp_path):
        assert main(["qlearn", "--method", "constant_prob", "--episodes", "1",
                     "-o", str(tmp_path / "x.csv")]) == 2

    def test_env_dump(self, capsys):
        assert main(["env-dump", "strens_loop", "--param", "slip=0.2"]) == 0
        d = json.loads(capsys.readouterr().out)
        assert d["env"]["params"] == {"slip": 0.2}
        assert np.array(d["transitions"]).shape == (9, 2, 9)

    def test_bad_param(self):
        assert main(["env-dump", "river_swim", "--param", "nonsense"]) == 2
        assert main(["env-dump", "river_swim", "--param", "p_right=0.9"]) == 2


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_console_script(tmp_path):
    res = subprocess.run([sys.executable, "-m", "discreg", "theorem-check", "--n-trials", "5", "--brief"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "5/5" in res.stdout
