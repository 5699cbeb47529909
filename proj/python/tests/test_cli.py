import csv
import io
import json
import subprocess

import jsonschema


def run(cli, *args, cwd=None):
    return subprocess.run([cli, *args], capture_output=True, text=True, cwd=cwd)


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def test_gen_is_deterministic_and_validates(cli, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["gen", "--n", "2", "--len", "2", "--noise", "iid:0.1", "--seed", "7"]
    assert run(cli, *args, "--out", str(a)).returncode == 0
    assert run(cli, *args, "--out", str(b)).returncode == 0
    assert a.read_bytes() == b.read_bytes()
    assert run(cli, "gen", "--n", "2", "--len", "2", "--noise", "iid:0.9").returncode == 2


def test_eval_report_schema_and_values(cli, tiny, schema, tmp_path):
    pop = write(tmp_path, "tiny.json", tiny)
    out = run(cli, "eval", "--pop", pop, "--policy", "fixed:1")
    assert out.returncode == 0, out.stderr
    report = json.loads(out.stdout)
    jsonschema.validate(report, schema)
    assert abs(report["frr"] - 0.45) < 1e-15
    assert abs(report["ar"] - 0.275) < 1e-15
    general = json.loads(run(cli, "eval", "--pop", pop, "--policy", "general:0.5").stdout)
    assert general["wap"]["value"] < 0.5


def test_exit_codes(cli, tiny, tmp_path):
    pop = write(tmp_path, "tiny.json", tiny)
    assert run(cli, "eval", "--pop", str(tmp_path / "missing.json"), "--policy", "fixed:1").returncode == 2
    assert run(cli, "eval", "--pop", pop, "--policy", "bogus").returncode == 2
    big = tmp_path / "big.json"
    assert run(cli, "gen", "--n", "3", "--len", "24", "--out", str(big)).returncode == 0
    assert run(cli, "eval", "--pop", str(big), "--policy", "fixed:3").returncode == 4
    score = tmp_path / "score.json"
    assert run(cli, "gen", "--n", "3", "--len", "6", "--noise", "gaussian:0.5:0.05", "--out", str(score)).returncode == 0
    assert run(cli, "eval", "--pop", str(score), "--policy", "general:0.1").returncode == 3
    assert run(cli, "sweep", "--pop", pop, "--kind", "fixed", "--grid", "").returncode == 2


def test_replay_reproduces_bytes(cli, tiny, tmp_path):
    pop = write(tmp_path, "tiny.json", tiny)
    report = tmp_path / "r.json"
    assert run(cli, "eval", "--pop", pop, "--policy", "gaussian:-1", "--out", str(report)).returncode == 0
    again = run(cli, "replay", "--report", str(report))
    assert again.returncode == 0
    assert again.stdout == report.read_text()


def test_mc_jobs_independence(cli, tmp_path):
    pop = tmp_path / "p.json"
    assert run(cli, "gen", "--n", "5", "--len", "40", "--noise", "iid:0.05:0.2", "--seed", "3",
               "--out", str(pop)).returncode == 0
    common = ["eval", "--pop", str(pop), "--policy", "fixed:10", "--mode", "mc", "--samples", "800",
              "--seed", "11", "--budget", "80", "--restarts", "4", "--confirm-samples", "2000",
              "--baseline-samples", "300"]
    one = run(cli, *common, "--jobs", "1")
    four = run(cli, *common, "--jobs", "4")
    assert one.returncode == 0 and one.stdout == four.stdout


def test_wolf_and_sweep(cli, tiny, tmp_path):
    pop = write(tmp_path, "tiny.json", tiny)
    cert = json.loads(run(cli, "wolf", "--pop", pop, "--policy", "fixed:1").stdout)
    assert cert["probe_hex"] == "0" and cert["is_wolf"] == (cert["ar_w"] > cert["ar_baseline"])
    out = run(cli, "sweep", "--pop", pop, "--kind", "fixed", "--grid", "3,0,1,2")
    rows = list(csv.DictReader(io.StringIO(out.stdout)))
    assert [float(r["parameter"]) for r in rows] == [0, 1, 2, 3]
    fars = [float(r["far"]) for r in rows]
    assert fars == sorted(fars)


def test_calibrate_round_trip(cli, tiny, tmp_path):
    pop = write(tmp_path, "tiny.json", tiny)
    cal = tmp_path / "cal.json"
    assert run(cli, "calibrate", "--pop", pop, "--policy", "general:0.5", "--out", str(cal)).returncode == 0
    with_file = run(cli, "eval", "--pop", pop, "--policy", "general:0.5", "--calibration", str(cal))
    assert with_file.returncode == 0
    assert json.loads(with_file.stdout)["wap"]["value"] < 0.5
    assert run(cli, "calibrate", "--pop", pop, "--policy", "fixed:1").returncode == 3
