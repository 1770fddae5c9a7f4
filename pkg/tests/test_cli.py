import json
from pathlib import Path

import pytest

from ranktower.cli import EXIT_INPUT, EXIT_MISSING, EXIT_OK, main, selftest_checks

SURF = Path(__file__).resolve().parents[1] / "surfaces"
E1, TX1, EB, YD = (str(SURF / f) for f in ("e1.json", "p1_tx1.json", "elliptic_base.json", "elliptic_base_ydep.json"))


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_conductor(capsys):
    code, out, _ = run(capsys, "conductor", E1, "--format", "json")
    assert code == EXIT_OK
    d = json.loads(out)
    assert d["total_degree"] == 7 and d["geometric_bound"] == 3
    code, out, _ = run(capsys, "conductor", EB)
    assert code == EXIT_OK and "# geometric_bound: 6" in out


def test_missing_spec(capsys):
    code, _, err = run(capsys, "conductor", "nope.json")
    assert code == EXIT_INPUT and err.startswith("error:")


def test_ap_scan(capsys):
    code, out, _ = run(capsys, "ap-scan", E1, "--pmax", "5", "--format", "csv")
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert lines[0] == "p,s_p,good,singular,skipped,A_p,slack"
    assert lines[1].startswith("5,-4,3,3,0,-0.800000,")


def test_ap_scan_empty(capsys):
    code, out, _ = run(capsys, "ap-scan", E1, "--pmax", "3", "--format", "json")
    assert code == EXIT_OK and json.loads(out)["rows"] == []


def test_ap_scan_y_dependent_has_no_slack(capsys):
    code, out, _ = run(capsys, "ap-scan", YD, "--pmax", "40", "--format", "json")
    d = json.loads(out)
    assert code == EXIT_OK and d["rows"] and all(r["slack"] == "-" for r in d["rows"])


def test_nagao(capsys):
    code, out, _ = run(capsys, "nagao", E1, "--cutoffs", "5", "--format", "json")
    d = json.loads(out)
    assert code == EXIT_OK and d["label"] == "conditional estimate"
    assert d["rows"] == [{"X": 5, "R_N": "0.257510", "R_M": "0.160000"}]
    assert d["section_lower_bound"] == 1


def test_nagao_bad_cutoffs(capsys):
    assert run(capsys, "nagao", E1, "--cutoffs", "50,20")[0] == EXIT_INPUT
    assert run(capsys, "nagao", E1, "--pmax", "3")[0] == EXIT_INPUT


def test_nagao_cache(capsys, tmp_path):
    cache = str(tmp_path / "e1.tsv")
    assert run(capsys, "nagao", E1, "--cutoffs", "50", "--no-scan", "--cache", cache)[0] == EXIT_MISSING
    code, first, _ = run(capsys, "nagao", E1, "--cutoffs", "50", "--cache", cache)
    assert code == EXIT_OK
    code, again, _ = run(capsys, "nagao", E1, "--cutoffs", "50", "--no-scan", "--cache", cache)
    assert code == EXIT_OK and again == first
    assert run(capsys, "nagao", E1, "--cutoffs", "80", "--no-scan", "--cache", cache)[0] == EXIT_MISSING


def test_tower(capsys):
    code, out, _ = run(capsys, "tower", EB, "--n", "1", "--pmax", "60", "--orbit-pmax", "200", "--format", "json")
    row = json.loads(out)["rows"][0]
    assert code == EXIT_OK
    assert (row["measured"], row["geometric"], row["|N(E_n)|"]) == ("6", "6", "6")


def test_tower_rejects_p1(capsys):
    code, _, err = run(capsys, "tower", E1, "--n", "2")
    assert code == EXIT_INPUT and "elliptic base" in err


def test_orbits(capsys):
    code, out, _ = run(capsys, "orbits", "gl2", "--n", "12", "--brute", "--format", "json")
    assert code == EXIT_OK and json.loads(out)["rows"][0]["orbits"] == "6"
    code, out, _ = run(capsys, "orbits", "average", "--n", "2", "--pmax", "5", "--format", "csv")
    assert out.strip().splitlines() == ["p,h0,image_size,running_average", "5,2,4,2.000000"]


def test_orbits_burnside_file(capsys, tmp_path):
    f = tmp_path / "a.json"
    f.write_text(json.dumps({"set_size": 3, "elements": [[0, 1, 2], [1, 2, 0], [2, 0, 1]],
                             "subgroup": [[0, 1, 2]]}))
    code, out, _ = run(capsys, "orbits", "burnside", "--file", str(f), "--format", "json")
    d = json.loads(out)
    assert code == EXIT_OK and d["rows"][0]["burnside"] == "1" and d["h_orbits"] == 3
    f.write_text(json.dumps({"set_size": 3, "elements": [[0, 1, 2], [1, 0, 2], [0, 2, 1]]}))
    assert run(capsys, "orbits", "burnside", "--file", str(f))[0] == EXIT_INPUT


def test_identity(capsys):
    code, out, _ = run(capsys, "identity", "gcd", "--nmax", "6", "--verbose", "--format", "csv")
    assert code == EXIT_OK
    assert out.strip().splitlines()[-1] == "6,8,8,True"


def test_bad_workers(capsys):
    assert run(capsys, "ap-scan", E1, "--pmax", "20", "--workers", "0")[0] == EXIT_INPUT


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["ap-scan", E1])
    assert exc.value.code == 2


def test_selftest():
    assert all(ok for _, ok in selftest_checks())


def test_output_deterministic(capsys):
    a = run(capsys, "ap-scan", TX1, "--pmax", "100")[1]
    b = run(capsys, "ap-scan", TX1, "--pmax", "100")[1]
    assert a == b
