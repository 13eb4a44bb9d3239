import json
import subprocess
import sys

import pytest

from dbc.cli import main
from dbc.cusps import cusp_bunch
from dbc.words import parse, words_equivalent

T23 = cusp_bunch(((1, 0),))
FIXTURE_WORDS = [
    "xi1 ~ eta1",
    "x1_0 ~ y1_0",
    "eta1 ~ xi1 -[0]- x1_0 ~ y1_0",
    "eta1 ~ xi1 -[0]- x1_0 ~ y1_0 -[0]- eta1 ~ xi1",
    "x1_0 ~ y1_0 -[1]- eta1 ~ xi1 -[0]- x1_0 ~ y1_0",
    "x1_0 ~ y1_0 -[-2]- eta1 ~ xi1 -[0]- x1_0 ~ y1_0 -[1]- eta1 ~ xi1",
]
BAND = "cycle(eta1 ~ xi1 -[2]- x1_0 ~ y1_0 ; [1])"


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


@pytest.fixture
def bunch_file(tmp_path, capsys):
    path = tmp_path / "b.json"
    code, out = run(capsys, "cusp", "--type", "(1,0)", "--emit-bunch")
    assert code == 0
    path.write_text(out)
    return path


def test_validate(bunch_file, capsys, tmp_path):
    assert run(capsys, "validate", str(bunch_file))[0] == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"E": ["a"], "F": ["c"], "sim": [], "dash": [["a", "a"]], "le": [], "tri": []}))
    assert run(capsys, "validate", str(bad))[0] in (1, 2)


@pytest.mark.parametrize("word", FIXTURE_WORDS)
def test_string_round_trip(word, bunch_file, capsys, tmp_path):
    code, out = run(capsys, "string", str(bunch_file), "--word", word, "--scramble", "15", "--seed", "7")
    assert code == 0
    rep = tmp_path / "r.json"
    rep.write_text(out)
    code, out = run(capsys, "decompose", str(bunch_file), str(rep))
    report = json.loads(out)
    assert code == 0 and report["certified"] and report["bands"] == []
    assert len(report["strings"]) == 1
    assert words_equivalent(T23, parse(report["strings"][0]), parse(word))


def test_band_round_trip(bunch_file, capsys, tmp_path):
    code, out = run(capsys, "--field", "Fp:101", "band", str(bunch_file), "--cycle", BAND, "--m", "2",
                    "--phi", "t-5", "--scramble", "20", "--seed", "4")
    assert code == 0
    rep = tmp_path / "r.json"
    rep.write_text(out)
    report = json.loads(run(capsys, "decompose", str(bunch_file), str(rep), "--field", "Fp:101")[1])
    assert report["strings"] == [] and [(b["m"], b["phi"]) for b in report["bands"]] == [(2, "t-5")]


def test_iso_exit_codes(bunch_file, capsys, tmp_path):
    files = {}
    for name, phi, seed in (("a", "t-5", "1"), ("b", "t-5", "2"), ("c", "t-6", "1")):
        out = run(capsys, "--field", "Fp:101", "band", str(bunch_file), "--cycle", BAND, "--m", "1",
                  "--phi", phi, "--scramble", "10", "--seed", seed)[1]
        files[name] = tmp_path / f"rep_{name}.json"
        files[name].write_text(out)
    common = ["--field", "Fp:101", "iso", str(bunch_file)]
    assert run(capsys, *common, str(files["a"]), str(files["b"]))[0] == 0
    assert run(capsys, *common, str(files["a"]), str(files["c"]))[0] == 1


def test_outputs_are_deterministic(bunch_file, capsys):
    argv = ["string", str(bunch_file), "--word", FIXTURE_WORDS[4], "--scramble", "25", "--seed", "3"]
    assert run(capsys, *argv) == run(capsys, *argv)


def test_cusp_emitters(capsys):
    code, out = run(capsys, "cusp", "--type", "(5,2)", "--emit-hj")
    assert json.loads(out) == [{"n": 5, "m": 2, "a": [2, 3], "c": [5, 3, 1, 0], "d": [0, 1, 2, 5]}]
    code, out = run(capsys, "cusp", "--type", "(5,2)", "--emit-pi", "--pretty")
    assert code == 0 and not out.startswith("{")
    assert run(capsys, "cusp", "--type", "(4,2)")[0] == 2


def test_catalog(capsys):
    code, out = run(capsys, "catalog", "--case", "5", "--a", "3,2,4,2")
    assert code == 0 and json.loads(out)["verified"]
    assert run(capsys, "catalog", "--case", "99")[0] == 2


def test_mf_verify(capsys, tmp_path):
    pair = {"phi": [["x", "y - i*z"], ["y + i*z", "-x"]], "psi": [["x", "y - i*z"], ["y + i*z", "-x"]],
            "f": "x^2 + y^2 + z^2"}
    path = tmp_path / "mf.json"
    path.write_text(json.dumps(pair))
    assert run(capsys, "--field", "Fp:13", "mf", "verify", str(path))[0] == 0
    assert run(capsys, "mf", "verify", str(path))[0] == 2  # no i over Q
    pair["psi"] = [["x", "y"], ["y", "x"]]
    path.write_text(json.dumps(pair))
    assert run(capsys, "--field", "Fp:13", "mf", "verify", str(path))[0] == 1


def test_family(capsys):
    code, out = run(capsys, "family", "--ring", "T23", "--id", "J", "--m", "3", "--lam", "2")
    assert code == 0 and json.loads(out)["checks"]["det"]["s"] == 1
    # the emitted pair uses the adjugate; the printed partner is reported and flagged
    code, out = run(capsys, "family", "--ring", "T23", "--id", "conductor")
    em = json.loads(out)
    assert code == 0 and not em["reports"]["printed_pair"]["ok"] and em["flags"]
    assert run(capsys, "family", "--ring", "XYZ", "--id", "theta4", "--m", "1", "--n", "1", "--l", "1",
               "--lam", "-1")[0] == 1
    code, out = run(capsys, "family", "--ring", "XYUV", "--id", "rank1", "--m", "1", "--n", "1", "--p", "1",
                    "--q", "1", "--lam", "1")
    assert code == 0 and json.loads(out)["flags"]
    assert run(capsys, "family", "--ring", "XYZ", "--id", "theta9")[0] == 2


def test_bad_input_exit_code(capsys, tmp_path):
    assert run(capsys, "validate", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "nope")[0] == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "dbc", "catalog", "--case", "1"], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["verified"]
