import json
import subprocess
import sys

import pytest

from detnorm.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main, parse_config, read_config, ConfigError
from detnorm.symbolic import read_stream


def run(args, capsysbinary):
    code = main(args)
    out = capsysbinary.readouterr()
    return code, out.out, out.err


def test_generate_thue_morse(capsysbinary):
    code, out, _ = run(["generate", "--group", "Z", "--gen", "thue-morse", "--horizon", "16"], capsysbinary)
    assert code == EXIT_OK and out == b"0110100110010110\n"


def test_generate_mult_thue_morse(capsysbinary):
    code, out, _ = run(["generate", "--group", "Nmul", "--gen", "mult-thue-morse", "--horizon", "8"], capsysbinary)
    assert code == EXIT_OK and out == b"01111010\n"


def test_generate_raw_stream_and_sidecar(tmp_path):
    out = tmp_path / "tm.sym"
    code = main(["generate", "--group", "N", "--gen", "thue-morse", "--horizon", "32", "--format", "raw",
                 "--out", str(out)])
    assert code == EXIT_OK
    with open(out, "rb") as fh:
        s, data = read_stream(fh)
    assert s == 2 and "".join(map(str, data[:8])) == "01101001"
    echo = json.loads((tmp_path / "tm.sym.config.json").read_text())
    assert echo["gen"] == "thue-morse" and echo["horizon"] == 32 and "workers" not in echo


def test_generate_json_csv(capsysbinary):
    code, out, _ = run(["generate", "--group", "Z2", "--gen", "prng", "--seed", "1", "--horizon", "5",
                        "--format", "json"], capsysbinary)
    doc = json.loads(out)
    assert code == EXIT_OK and len(doc["symbols"]) == 5 and doc["elements"][0] == "0,0"
    code, out, _ = run(["generate", "--group", "N", "--gen", "periodic:pattern=011", "--horizon", "4",
                        "--format", "csv"], capsysbinary)
    assert out.decode().splitlines() == ["element,symbol", '"0",0', '"1",1', '"2",1', '"3",0']


@pytest.mark.parametrize("args", [
    ["generate", "--group", "Z", "--gen", "nope", "--horizon", "8"],
    ["generate", "--group", "Z", "--gen", "prng", "--horizon", "8"],
    ["generate", "--group", "Q", "--gen", "thue-morse", "--horizon", "8"],
    ["generate", "--group", "Nmul", "--gen", "thue-morse", "--horizon", "8"],
    ["generate", "--group", "Z", "--gen", "thue-morse"],
    ["normality", "--gen", "prng", "--seed", "0", "--n", "100"],
    ["normality", "--gen", "prng", "--seed", "0", "--set", "evens", "--n", "100", "--mode", "fancy"],
    ["complexity", "--gen", "thue-morse", "--n", "100", "--eps", "1.5"],
    ["complexity", "--gen", "thue-morse", "--n", "abc"],
    ["frobnicate"],
    [],
    ["generate", "--bogus-flag", "1"],
])
def test_usage_errors_exit_1(args, capsysbinary):
    code, _, err = run(args, capsysbinary)
    assert code == EXIT_USAGE and b"error" in err


def test_normality_pass_and_fail(capsysbinary):
    code, out, _ = run(["normality", "--gen", "prng", "--seed", "0", "--set", "evens", "--mode", "orbit",
                        "--n", "1000000"], capsysbinary)
    assert code == EXIT_OK and json.loads(out)["verdict"] == "pass"
    code, out, _ = run(["normality", "--gen", "prng", "--seed", "0", "--set", "level:1", "--mode", "simple",
                        "--n", "100000"], capsysbinary)
    rep = json.loads(out)
    assert code == EXIT_FAIL and rep["verdict"] == "fail"
    assert all(t["deviation"] == 0.5 for t in rep["tests"])


def test_normality_modes(capsysbinary):
    for mode in ("simple", "orbit", "block", "classical"):
        code, out, _ = run(["normality", "--gen", "prng", "--seed", "0", "--set", "residue:1/3", "--mode", mode,
                            "--n", "300000", "--catalog", "intervals:3"], capsysbinary)
        assert code in (EXIT_OK, EXIT_FAIL)
        assert json.loads(out)["mode"] == mode


def test_normality_on_permutations(capsysbinary):
    code, out, _ = run(["normality", "--group", "Perm", "--gen", "prng", "--seed", "2", "--set", "incr:2",
                        "--mode", "simple", "--n", "7", "--tol", "0.05"], capsysbinary)
    assert code == EXIT_OK and json.loads(out)["anchor_count"] == 2520


def test_complexity_thue_morse_csv(capsysbinary):
    code, out, _ = run(["complexity", "--gen", "thue-morse", "--catalog", "intervals:32", "--n", "1000000",
                        "--folner", "initial"], capsysbinary)
    rows = out.decode().strip().splitlines()
    assert code == EXIT_OK and rows[0] == "m,size,count,ratio"
    last = rows[-1].split(",")
    assert last[2] == "94" and float(last[3]) <= 0.22


def test_complexity_periodic_eps(capsysbinary):
    code, out, _ = run(["complexity", "--gen", "periodic:pattern=0010111", "--catalog", "intervals:12",
                        "--n", "50000", "--eps", "0.1", "--format", "json"], capsysbinary)
    doc = json.loads(out)
    assert code == EXIT_OK and all(r["count"] <= 7 for r in doc["rows"])


def test_experiment_exit_codes(capsysbinary):
    code, out, _ = run(["experiment", "--gen", "prng", "--seed", "0", "--set", "evens", "--n", "200000",
                        "--tol", "5e-3"], capsysbinary)
    assert code == EXIT_OK and json.loads(out)["verdict"] == "pass"
    code, out, _ = run(["experiment", "--gen", "prng", "--seed", "0", "--set", "level:1", "--n", "20000"],
                       capsysbinary)
    assert code == EXIT_FAIL and json.loads(out)["simple"]["verdict"] == "fail"


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.conf"
    cfg.write_text('# example\n[run]\ngen = "thue-morse"\ngroup = Z\nhorizon = 8\n')
    c = parse_config(["generate", "--config", str(cfg), "--horizon", "4"])
    assert c.gen == "thue-morse" and c.horizon == 4 and c.group == "Z"
    bad = tmp_path / "bad.conf"
    bad.write_text("colour = blue\n")
    with pytest.raises(ConfigError):
        read_config(str(bad))
    assert main(["generate", "--config", str(tmp_path / "missing.conf")]) == EXIT_USAGE


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "detnorm", "generate", "--group", "Z", "--gen", "thue-morse",
                          "--horizon", "8"], capture_output=True)
    assert res.returncode == 0 and res.stdout == b"01101001\n"
    res = subprocess.run([sys.executable, "-m", "detnorm", "normality", "--gen", "prng", "--seed", "0",
                          "--n", "10"], capture_output=True)
    assert res.returncode == 1 and b"--set" in res.stderr
