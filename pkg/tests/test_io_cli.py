import io
import json
import random
import subprocess
import sys
from pathlib import Path

import pytest

import kgring
from kgring.cli import main
from kgring.examples import random_divisible, six_module, standard_module
from kgring.io import (
    dumps,
    extension_from_dict,
    extension_to_dict,
    load_module,
    module_from_dict,
    module_to_dict,
)
from kgring.modules import free_module
from kgring.splitting import random_extension

FIX = Path(kgring.__file__).parent / "fixtures"


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.mark.parametrize("M", [
    standard_module(2).module,
    six_module().module,
    free_module((2, 3), (1, 2), 6),
    random_divisible(random.Random(4)),
])
def test_module_round_trip(M):
    d = module_to_dict(M)
    text = dumps(d)
    back = module_from_dict(json.loads(text))
    assert back == M
    assert dumps(module_to_dict(back)) == text


def test_extension_round_trip():
    sigma = random_extension(free_module((2,), (2,), 2), standard_module(2).module, seed=3)
    d = extension_to_dict(sigma)
    back = extension_from_dict(json.loads(dumps(d)))
    assert back.middle == sigma.middle
    assert dumps(extension_to_dict(back)) == dumps(d)


def test_fixtures_parse():
    for path in sorted(FIX.glob("*.json")):
        data = json.loads(path.read_text())
        if "middle" in data:
            extension_from_dict(data).check()
        else:
            module_from_dict(data)


def test_check_ring():
    code, out = run("check-ring", "-p", 2)
    assert code == 0 and "all checks passed" in out
    code, out = run("check-ring", "--prime", 5, "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["passed"] and len(data["derived"]) == 12


def test_check_ring_rejects_composite(capsys):
    with pytest.raises(SystemExit) as exc:
        run("check-ring", "-p", 6)
    assert exc.value.code == 2
    assert "not prime" in capsys.readouterr().err


def test_validate_and_exact_fixtures():
    assert run("validate", FIX / "standard_p2.json")[0] == 0
    assert run("exact", FIX / "standard_p2.json")[0] == 0
    assert run("validate", FIX / "empty.json")[0] == 0
    assert run("exact", FIX / "empty.json")[0] == 0
    code, out = run("validate", FIX / "standard_p2_corrupted.json")
    assert code == 1 and "alpha01 alpha10 = N(t0)" in out
    code, out = run("exact", FIX / "witness_p2.json", "--format", "json")
    data = json.loads(out)
    assert code == 1 and not data["exact"]


def test_split_commands():
    code, out = run("split", FIX / "extension_6.json", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["verified"]
    assert data["bezout"] == [-2, 1]
    code, _ = run("split", FIX / "extension_6.json", "--method", "solve")
    assert code == 0
    code, out = run("split", FIX / "nonexact_6.json")
    assert code == 1 and "certificate: quotient not exact" in out


def test_split_single_prime_explains():
    code, out = run("split", FIX / "extension_p2.json")
    assert code == 1
    assert "at least two primes" in out and "--method solve" in out
    assert run("split", FIX / "extension_p2.json", "--method", "solve")[0] == 0


def test_decompose_nine_pieces():
    code, out = run("decompose", FIX / "six_z6.json", "--format", "json")
    data = json.loads(out)
    assert code == 0
    assert len(data["pieces"]) == 9
    assert not any(p["zero"] for p in data["pieces"].values())
    assert data["pieces"]["YZ"]["ring"] == "Z[1/6][theta_2, theta_3]"
    assert data["reconstructed"]


def test_hom_and_ext1():
    code, out = run("hom", FIX / "standard_p2.json", FIX / "standard_p2.json", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["hom"]["even"]["rank"] == 3
    code, out = run("ext1", FIX / "free_6.json", FIX / "six_z6.json", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["ext1"]["even"] == {"rank": 0, "torsion": []}


def test_hensel():
    code, out = run("hensel", "-p", 7, "-q", 3, "-k", 2)
    assert code == 0 and out.splitlines()[0].endswith(": 30")
    code, out = run("hensel", "-p", 7, "-q", 3, "-k", 2, "--format", "json")
    assert json.loads(out)["root"] == 30


def test_hensel_error():
    code, out = run("hensel", "-p", 7, "-q", 5)
    assert code == 1 and "does not divide" in out


def test_outputs_are_deterministic():
    for argv in (("decompose", FIX / "six_z6.json"), ("hom", FIX / "six_z6.json", FIX / "six_z6.json"),
                 ("split", FIX / "extension_6.json", "--format", "json")):
        assert run(*argv) == run(*argv)


def test_malformed_input(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("validate", bad)[0] == 2
    assert "malformed JSON" in capsys.readouterr().err
    wrong = module_to_dict(standard_module(2).module)
    wrong["maps"]["p=2:alpha10"]["0"] = [["1", "2", "3"]]
    path = tmp_path / "wrong.json"
    path.write_text(json.dumps(wrong))
    assert run("validate", path)[0] == 2
    wrong = module_to_dict(standard_module(2).module)
    wrong["maps"]["p=3:alpha10"] = {}
    path.write_text(json.dumps(wrong))
    assert run("validate", path)[0] == 2
    assert run("validate", tmp_path / "missing.json")[0] == 2


def test_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "kgring.cli", "hensel", "-p", "7", "-q", "3", "-k", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and ": 30" in proc.stdout


def test_round_trip_file(tmp_path):
    path = tmp_path / "m.json"
    M = six_module().module
    path.write_text(dumps(module_to_dict(M)))
    assert load_module(path) == M
