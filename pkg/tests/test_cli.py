import json
import subprocess
import sys

import numpy as np
import pytest

from sparsesketch.cli import main
from sparsesketch.harness import parse_csv_report
from sparsesketch.signal_io import write_signal


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def records(out):
    return [json.loads(line) for line in out.splitlines() if line.strip()]


def test_recover_json(capsys):
    code, out = run(capsys, "recover", "--n", "1024", "--k", "2", "--trials", "2", "--seed", "3")
    recs = records(out)
    assert code == 0
    assert [r["type"] for r in recs] == ["header", "trial", "trial", "summary"]
    assert recs[0]["profile"]["name"] == "desk"
    assert all(r["profile"] == "desk" for r in recs[1:3])


def test_set_override_echoed(capsys):
    _, out = run(capsys, "recover", "--n", "1024", "--k", "2", "--set", "sq_C=32", "--set", "forest_eta=1/8")
    header = records(out)[0]
    assert header["profile"]["sq_C"] == 32 and header["profile"]["forest_eta"] == 0.125


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("sq_C = 16\nprune_beta = 5\n")
    _, out = run(capsys, "recover", "--n", "1024", "--k", "2", "--config", str(cfg), "--set", "sq_C=24")
    prof = records(out)[0]["profile"]
    assert prof["sq_C"] == 24 and prof["prune_beta"] == 5


def test_csv_format(capsys):
    code, out = run(capsys, "tail-est", "--n", "2000", "--k", "2", "--trials", "3", "--format", "csv", "--soft-stats")
    assert code == 0
    rows = parse_csv_report(out)
    assert len(rows) == 3 and rows[0]["profile"] == "desk"
    assert out.splitlines()[0].startswith("# ")


def test_statistical_failure_exit_code(capsys):
    # the bracket check misses at desk constants, so without --soft-stats the exit code is 1
    code, _ = run(capsys, "tail-est", "--n", "2000", "--k", "2", "--trials", "3")
    assert code == 1


def test_usage_errors(capsys):
    assert main(["recover", "--profile", "nope"]) == 2
    assert main(["recover", "--set", "sq_C"]) == 2
    assert main(["recover", "--set", "nope=1"]) == 2


def test_input_file(capsys, tmp_path):
    x = np.zeros(1024)
    x[[3, 700]] = [50.0, -40.0]
    path = tmp_path / "x.bin"
    write_signal(path, x)
    code, out = run(capsys, "recover", "--input", str(path), "--k", "2")
    assert code == 0 and records(out)[1]["success"]


def test_set_query_stream(capsys, tmp_path):
    stream = tmp_path / "s.txt"
    stream.write_text("3,5.0\n10,-2\n3,1.0\n")
    support = tmp_path / "S.txt"
    support.write_text("3\n10\n")
    code, out = run(capsys, "set-query", "--stream", str(stream), "--support", str(support),
                    "--n", "64", "--k", "2")
    trial = records(out)[1]
    assert code == 0 and trial["x_prime"] == [6.0, -2.0] and trial["touch_ok"]


def test_prune_list_and_dump(capsys, tmp_path):
    L = tmp_path / "L.txt"
    L.write_text("\n".join(map(str, range(0, 1024, 7))))
    code, out = run(capsys, "prune", "--n", "1024", "--k", "2", "--list", str(L), "--dump-estimates", "--soft-stats")
    trial = records(out)[1]
    assert code == 0 and len(trial["estimates"]) == len(range(0, 1024, 7))


def test_out_file(capsys, tmp_path):
    dest = tmp_path / "r.json"
    assert main(["identify", "--n", "1024", "--k", "1", "--out", str(dest), "--soft-stats"]) == 0
    assert records(dest.read_text())[-1]["type"] == "summary"


@pytest.mark.parametrize("argv", [
    ["filter-check", "--n", "1024", "--buckets", "16"],
    ["oracle-check", "--n", "256", "--seeds", "2"],
    ["fourier-sq", "--n", "512", "--k", "4"],
    ["events", "--n", "1024", "--k", "4", "--buckets", "64", "--soft-stats"],
    ["walk", "--trials", "200", "--steps", "500"],
    ["gaussian-fact", "--trials", "20000"],
])
def test_other_subcommands(capsys, argv):
    code, out = run(capsys, *argv)
    assert code == 0
    assert records(out)[0]["type"] == "header"


def test_acceptance_subcommand(capsys):
    code, out = run(capsys, "acceptance", "-c", "9")
    assert code == 0 and out.startswith("[PASS] criterion 9")


def test_env_profile(tmp_path):
    env = {"SKETCH_PROFILE": "paper", "PATH": "/usr/bin:/bin"}
    proc = subprocess.run(
        [sys.executable, "-m", "sparsesketch.cli", "filter-check", "--n", "256", "--buckets", "8"],
        capture_output=True, text=True, env=env,
    )
    assert proc.returncode == 0
    assert records(proc.stdout)[0]["profile"]["name"] == "paper"
