import json
from fractions import Fraction

from lotforge.cli import decimal_str, main
from lotforge.instance import gen_kc_gap, gen_random, load, save


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def strip_wall_time(csv_text: str) -> str:
    lines = csv_text.strip().splitlines()
    header = lines[0].split(",")
    drop = header.index("wall_time_ms")
    return "\n".join(",".join(cell for i, cell in enumerate(line.split(","))
                              if i != drop) for line in lines)


class TestGenerate:
    def test_random_instance_file(self, tmp_path, capsys):
        out = tmp_path / "inst.json"
        code, _, _ = run_cli(capsys, "generate", "--seed", "4", "--T", "5",
                             "--N", "3", "--out", str(out))
        assert code == 0
        assert load(out) == gen_random(4, T=5, N=3)

    def test_kc_gap_family(self, tmp_path, capsys):
        out = tmp_path / "gap.json"
        code, _, _ = run_cli(capsys, "generate", "--family", "kc-gap",
                             "--R", "1000", "--out", str(out))
        assert code == 0
        assert load(out) == gen_kc_gap(Fraction(1000))

    def test_missing_params_rejected(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "generate", "--out",
                               str(tmp_path / "x.json"))
        assert code == 1 and "needs" in err


class TestSolveVerify:
    def test_gap_solve_and_verify(self, tmp_path, capsys):
        inst_path = tmp_path / "gap.json"
        sched_path = tmp_path / "sched.json"
        save(gen_kc_gap(Fraction(1000)), inst_path)
        code, out, _ = run_cli(capsys, "solve", "--in", str(inst_path),
                               "--out", str(sched_path))
        assert code == 0
        report = json.loads(out)
        assert report["alg_cost"]["total"]["exact"] == "1/1"
        assert report["certificate"]["ordering_bound_ok"] is True
        ratio = Fraction(report["ratio_vs_lp"]["exact"])
        assert ratio <= 10
        code, _, _ = run_cli(capsys, "verify", "--instance", str(inst_path),
                             "--schedule", str(sched_path))
        assert code == 0

    def test_single_period_total(self, tmp_path, capsys):
        inst_path = tmp_path / "one.json"
        save(gen_random(1, T=1, N=1), inst_path)
        code, out, _ = run_cli(capsys, "solve", "--in", str(inst_path),
                               "--out", str(tmp_path / "s.json"))
        assert code == 0
        report = json.loads(out)
        inst = gen_random(1, T=1, N=1)
        assert Fraction(report["alg_cost"]["total"]["exact"]) >= inst.K[0]

    def test_round_cap_exit_code(self, tmp_path, capsys):
        inst_path = tmp_path / "gap.json"
        save(gen_kc_gap(Fraction(1000)), inst_path)
        code, _, err = run_cli(capsys, "solve", "--in", str(inst_path),
                               "--out", str(tmp_path / "s.json"),
                               "--max-rounds", "0")
        assert code == 2 and "round cap" in err

    def test_missing_file_exit_code(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "solve", "--in",
                               str(tmp_path / "nope.json"),
                               "--out", str(tmp_path / "s.json"))
        assert code == 1 and "error" in err

    def test_tampered_quantity_detected(self, tmp_path, capsys):
        inst_path = tmp_path / "i.json"
        sched_path = tmp_path / "s.json"
        save(gen_random(6, T=4, N=3), inst_path)
        assert run_cli(capsys, "solve", "--in", str(inst_path),
                       "--out", str(sched_path))[0] == 0
        doc = json.loads(sched_path.read_text())
        doc["assignment"][0]["qty"] = "1000000/1"
        sched_path.write_text(json.dumps(doc))
        code, _, err = run_cli(capsys, "verify", "--instance", str(inst_path),
                               "--schedule", str(sched_path))
        assert code == 3 and "mismatch" in err

    def test_tampered_cost_detected(self, tmp_path, capsys):
        inst_path = tmp_path / "i.json"
        sched_path = tmp_path / "s.json"
        save(gen_random(6, T=4, N=3), inst_path)
        run_cli(capsys, "solve", "--in", str(inst_path), "--out", str(sched_path))
        doc = json.loads(sched_path.read_text())
        doc["costs"]["total"] = "999/1"
        sched_path.write_text(json.dumps(doc))
        code, _, err = run_cli(capsys, "verify", "--instance", str(inst_path),
                               "--schedule", str(sched_path))
        assert code == 3 and "mismatch" in err

    def test_trace_flag_writes_stderr(self, tmp_path, capsys):
        inst_path = tmp_path / "gap.json"
        save(gen_kc_gap(Fraction(1000)), inst_path)
        code, _, err = run_cli(capsys, "solve", "--in", str(inst_path),
                               "--out", str(tmp_path / "s.json"), "--trace")
        assert code == 0
        assert "round=" in err


class TestBench:
    def test_csv_shape_and_determinism(self, capsys):
        code, out1, _ = run_cli(capsys, "bench", "--seeds", "1..3", "--T", "4",
                                "--N", "3")
        assert code == 0
        code, out2, _ = run_cli(capsys, "bench", "--seeds", "1..3", "--T", "4",
                                "--N", "3")
        assert code == 0
        assert strip_wall_time(out1) == strip_wall_time(out2)
        lines = out1.strip().splitlines()
        assert lines[0].startswith("instance_id,lp_value")
        assert len(lines) == 4
        assert lines[1].split(",")[0] == "seed-1"

    def test_oracle_mode_ratios(self, capsys):
        code, out, _ = run_cli(capsys, "bench", "--seeds", "2..4", "--T", "5",
                               "--N", "3", "--oracle")
        assert code == 0
        header = out.strip().splitlines()[0].split(",")
        col = header.index("ratio_vs_opt")
        for line in out.strip().splitlines()[1:]:
            ratio = line.split(",")[col]
            assert ratio and Fraction(ratio) <= 10

    def test_oracle_cap_refused(self, capsys):
        code, _, err = run_cli(capsys, "bench", "--seeds", "1..1", "--T", "15",
                               "--N", "2", "--oracle")
        assert code == 1 and "cap" in err

    def test_empty_seed_range(self, capsys):
        code, out, _ = run_cli(capsys, "bench", "--seeds", "5..4", "--T", "4",
                               "--N", "2")
        assert code == 0
        assert out.strip().splitlines() == [out.strip().splitlines()[0]]

    def test_bad_seed_syntax(self, capsys):
        code, _, err = run_cli(capsys, "bench", "--seeds", "abc", "--T", "4",
                               "--N", "2")
        assert code == 1 and "--seeds" in err

    def test_out_file(self, tmp_path, capsys):
        out_path = tmp_path / "bench.csv"
        code, out, _ = run_cli(capsys, "bench", "--seeds", "1..1", "--T", "4",
                               "--N", "2", "--out", str(out_path))
        assert code == 0 and out == ""
        assert out_path.read_text().startswith("instance_id,")


class TestMisc:
    def test_decimal_rendering(self):
        assert decimal_str(Fraction(1, 3)) == "0.333333333333"
        assert decimal_str(Fraction(7, 1)) == "7"

    def test_usage_error_returns_one(self, capsys):
        assert main(["no-such-command"]) == 1

    def test_env_var_enables_trace(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("LOTFORGE_TRACE", "1")
        inst_path = tmp_path / "gap.json"
        save(gen_kc_gap(Fraction(1000)), inst_path)
        code, _, err = run_cli(capsys, "solve", "--in", str(inst_path),
                               "--out", str(tmp_path / "s.json"))
        assert code == 0 and "round=" in err
