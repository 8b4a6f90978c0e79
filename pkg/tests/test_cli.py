import json
import subprocess
import sys

import numpy as np
import pytest

from ttr1svd.cli import main
from ttr1svd.decomposition import loads_decomposition, reconstruct
from ttr1svd.tensor import loads_tensor, running_example


def run(argv, stdin="", capsys=None, monkeypatch=None):
    import io

    monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def cli(capsys, monkeypatch):
    return lambda argv, stdin="": run(argv, stdin, capsys, monkeypatch)


def test_gen_decompose(cli):
    code, tensor, _ = cli(["gen", "running-example"])
    assert code == 0 and loads_tensor(tensor) == running_example()
    code, dec, err = cli(["decompose"], tensor)
    assert code == 0 and "6 terms" in err
    d = loads_decomposition(dec)
    assert len(d) == 6 and d.sigmas[0] == pytest.approx(69.6306, abs=1e-4)


def test_round_trip_reconstruct(cli, tmp_path):
    _, tensor, _ = cli(["gen", "gaussian", "3,2,4", "5"])
    path = tmp_path / "t.json"
    path.write_text(tensor)
    dpath = tmp_path / "d.json"
    assert cli(["decompose", str(path), "-o", str(dpath)])[0] == 0
    _, back, _ = cli(["reconstruct", str(dpath)])
    a, b = loads_tensor(tensor), loads_tensor(back)
    assert np.linalg.norm(a.array - b.array) <= 1e-12 * np.linalg.norm(a.array)


def test_truncate_matches_library(cli):
    _, tensor, _ = cli(["gen", "inverse-sum", "5"])
    _, dec, _ = cli(["decompose"], tensor)
    code, out, err = cli(["truncate", "--eps", "1e-6"], dec)
    assert code == 0 and int(out) == 18 and "R = 18" in err


def test_perm_and_eps(cli):
    _, tensor, _ = cli(["gen", "running-example"])
    _, dec, _ = cli(["decompose", "--perm", "2,3,1"], tensor)
    assert len(loads_decomposition(dec)) == 8
    _, dec, _ = cli(["decompose", "--eps", "1.0"], tensor)
    d = loads_decomposition(dec)
    assert d.prune_tolerance == 1.0
    assert np.linalg.norm(reconstruct(d).array - running_example().array) <= 1.0


def test_empty_file_exit_1(cli, tmp_path):
    p = tmp_path / "empty.json"
    p.write_text("")
    code, out, err = cli(["decompose", str(p)])
    assert code == 1 and out == "" and "parse" in err


def test_missing_field_named(cli):
    code, _, err = cli(["decompose"], json.dumps({"dims": [2], "data": [1, 2]}))
    assert code == 1 and "order" in err


def test_missing_file(cli):
    code, _, err = cli(["decompose", "/nonexistent/x.json"])
    assert code == 1 and "does not exist" in err


def test_usage_errors_exit_1(cli):
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["decompose", "--bogus"])
    assert e.value.code == 1


def test_numerical_error_exit_2(cli, monkeypatch):
    def boom(*a, **k):
        raise np.linalg.LinAlgError("no convergence")

    _, tensor, _ = cli(["gen", "running-example"])
    monkeypatch.setattr(np.linalg, "svd", boom)
    code, _, err = cli(["decompose"], tensor)
    assert code == 2 and "numerical" in err


def test_other_commands(cli):
    _, a, _ = cli(["gen", "running-example"])
    _, dec, _ = cli(["decompose"], a)
    code, out, _ = cli(["tucker", "--rank", "3"], dec)
    assert code == 0 and json.loads(out)["format"] == "tucker"
    code, out, _ = cli(["complement"], a)
    obj = json.loads(out)
    assert obj["count"] == 23 and {e["kind"] for e in obj["elements"]} == {"zero-weight", "mixing"}
    code, out, _ = cli(["permscan"], a)
    assert code == 0 and len(out.splitlines()) == 7
    code, out, _ = cli(["deflate", "--iters", "5"], a)
    assert [int(l.split(",")[1]) for l in out.splitlines()[1:]] == [4, 4, 4, 4, 3, 2]
    code, out, _ = cli(["perturb", "--variance", "1e-12", "--seed", "1"], a)
    assert code == 0 and json.loads(out)["rss_dev"] < json.loads(out)["e_frob"]
    code, out, _ = cli(["cpals", "--rank", "1", "--seeds", "2"], a)
    lines = out.splitlines()
    assert lines[0] == "seed,error,iterations" and lines[-1].startswith("median,")
    code, out, _ = cli(["trace"], a)
    assert len(out.splitlines()) == 1 + 6 * 2
    code, out, _ = cli(["svcurve"], dec)
    assert len(out.splitlines()) == 7
    code, out, _ = cli(["svcurve"], a)
    assert len(out.splitlines()) == 7


def test_rank3_commands(cli):
    _, t, _ = cli(["gen", "gaussian", "2,2,2", "1"])
    code, out, _ = cli(["rank3", "-"], t)
    obj = json.loads(out)
    assert code == 0 and len(obj["terms"]) <= 3 and obj["error"] < 1e-12
    code, out, _ = cli(["rank3", "--trials", "3"])
    assert json.loads(out)["trials"] == 3
    code, _, err = cli(["rank3", "-"], a := json.dumps({"dims": [2, 2], "order": "column-major", "data": [1, 2, 3, 4]}))
    assert code == 1 and "2x2x2" in err


def test_gen_errors(cli):
    assert cli(["gen", "nope"])[0] == 1
    assert cli(["gen", "gaussian", "3,3"])[0] == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "ttr1svd", "gen", "inverse-sum", "2"], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["dims"] == [2, 2, 2]
