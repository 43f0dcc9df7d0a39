import csv
import hashlib
import io
import json
import subprocess
import sys

import pytest

from coopnet import __version__
from coopnet.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("family,code,cls", [
    ("ring_of_stars:L=5,n=20", 0, "Promoter"),
    ("clique:n=6", 1, "SpitePromoter"),
    ("star:n=6", 2, "NeverFavored"),
])
def test_bstar_exit_codes(capsys, family, code, cls):
    rc, out, _ = run(capsys, "bstar", "--family", family)
    assert rc == code
    assert json.loads(out)["classification"] == cls


def test_bstar_csv_and_exact(capsys):
    rc, out, _ = run(capsys, "bstar", "--family", "clique:n=5", "--format", "csv", "--method", "exact")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["n", "mean_degree", "numerator", "denominator", "b_star", "inv_b_star",
                       "classification", "updating", "method", "residual"]
    assert rows[1][4] == "-4" and rows[1][8] == "exact"


def test_errors_exit_3(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n1 zz\n")
    rc, _, err = run(capsys, "bstar", "--input", str(bad))
    assert rc == 3 and "line 2" in err
    rc, _, err = run(capsys, "bstar", "--input", str(tmp_path / "missing.txt"))
    assert rc == 3
    rc, _, err = run(capsys, "bstar", "--model", "er:n=20,p=0.3")
    assert rc == 3 and "seed" in err
    rc, _, _ = run(capsys, "bstar", "--family", "star:n=x")
    assert rc == 3


def test_input_file_manifest(capsys, tmp_path):
    src = tmp_path / "g.txt"
    src.write_text("5 6\n6 7\n7 5\n7 8\n")
    out = tmp_path / "r.json"
    rc, _, _ = run(capsys, "bstar", "--input", str(src), "--out", str(out))
    assert rc in (0, 1, 2)
    manifest = json.loads((tmp_path / "r.json.manifest.json").read_text())
    assert manifest["command"] == "bstar"
    assert manifest["version"] == __version__
    assert manifest["input_digests"] == {str(src): hashlib.sha256(src.read_bytes()).hexdigest()}
    assert manifest["outputs"] == [str(out)]
    assert manifest["argv"][:2] == ["bstar", "--input"]
    assert json.loads(out.read_text())["n"] == 4


def test_generate_rerun_is_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for path in (a, b):
        assert run(capsys, "generate", "er:n=30,p=0.2", "--seed", "9", "--out", str(path))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    manifest = json.loads((tmp_path / "a.txt.manifest.json").read_text())
    assert manifest["seed"] == 9
    rc, out, _ = run(capsys, "generate", "star_of_cliques:m=4,n=10", "--format", "json")
    assert json.loads(out)["n"] == 41
    assert run(capsys, "generate", "nope:n=3")[0] == 3
    assert run(capsys, "generate", "er:n=5,p=0.5,seed=1", "--seed", "2")[0] == 3


def test_sweep_csv_and_json(capsys):
    rc, out, _ = run(capsys, "sweep", "--g1-family", "star:n=3", "--g2-family", "star:n=3")
    rows = list(csv.reader(io.StringIO(out)))
    assert rc == 0 and rows[0] == ["gate1", "gate2", "b_star", "inv_b_star", "classification"]
    assert len(rows) == 17
    rc, out, _ = run(capsys, "sweep", "--g1-family", "star:n=3", "--g2-family", "star:n=3",
                     "--brokers", "1", "--format", "json")
    d = json.loads(out)
    assert d["pair_count"] == 16 and d["brokers"] == 1 and "median_convention" in d


def test_simulate_rerun_identical(capsys, tmp_path):
    argv = ["simulate", "--family", "star:n=4", "--seed", "5", "--trials", "2000", "--b", "3"]
    rc, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert rc == 0 and first == second
    rows = list(csv.reader(io.StringIO(first)))
    assert rows[0] == ["b", "c", "delta", "trials", "fixations", "rho_hat", "std_err", "n_rho",
                       "capped"]
    rc, out, _ = run(capsys, "simulate", "--family", "ring_of_stars:L=3,n=2", "--seed", "1",
                     "--trials", "200", "--factors", "0.5", "2")
    assert rc == 0 and len(out.strip().splitlines()) == 3
    # scanning factors of b* needs a Promoter
    assert run(capsys, "simulate", "--family", "clique:n=4", "--seed", "1", "--trials", "10")[0] == 3


def test_conjoin_modes(capsys, tmp_path):
    rc, out, _ = run(capsys, "conjoin", "--g1-family", "clique:n=5", "--g2-family", "clique:n=5",
                     "--brokers", "1", "--leaves", "10:4")
    assert rc == 0
    assert len(out.strip().splitlines()) == 10 + 10 + 2 + 4
    rc, via, _ = run(capsys, "bstar", "--family", "two_cliques_via_star:n=5,m_star=5")
    path = tmp_path / "c.txt"
    path.write_text(out)
    rc, direct, _ = run(capsys, "bstar", "--input", str(path))
    assert json.loads(direct)["b_star"] == pytest.approx(json.loads(via)["b_star"], rel=1e-9)
    groups = []
    for i in range(3):
        p = tmp_path / f"k{i}.txt"
        run(capsys, "generate", "clique:n=4", "--out", str(p), "--manifest", str(tmp_path / "m.json"))
        groups.append(str(p))
    assert run(capsys, "conjoin", "--groups", *groups, "--p-between", "0.2")[0] == 3
    rc, out, _ = run(capsys, "conjoin", "--groups", *groups, "--p-between", "0.2", "--seed", "3")
    assert rc == 0 and len(out.splitlines()) >= 18
    assert run(capsys, "conjoin", "--g1-family", "star:n=2", "--g2-family", "star:n=2",
               "--leaves", "1:x")[0] == 3


def test_verify_families_fixtures_only(capsys):
    rc, out, _ = run(capsys, "verify-families", "--skip-grid")
    assert "== fixtures" in out and "== clique law: 18/18 pass" in out
    assert rc == (1 if "FAIL" in out else 0)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "coopnet.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout
