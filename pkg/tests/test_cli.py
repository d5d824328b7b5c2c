import csv
import json

import pytest

from epsclass import cli, quadclass
from epsclass.quadclass import ClassNumberCapError


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, out


def rows_of(out):
    lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
    parsed = list(csv.reader(lines))
    return parsed[0], parsed[1:]


def config_of(out):
    line = next(ln for ln in out.splitlines() if ln.startswith("# ")
                and "=" in ln)
    return dict(kv.split("=", 1) for kv in line[2:].split(" "))


def test_usage_errors(capsys):
    assert cli.main(["no-such-command"]) == 2
    assert cli.main([]) == 2
    assert cli.main(["tor-scan", "--p", "2"]) == 2   # missing range


def test_primes_csv(capsys):
    code, out = run(["primes", "--p", "3", "--count", "5"], capsys)
    assert code == 0
    header, rows = rows_of(out)
    assert header == ["k", "ell"]
    assert rows == [["1", "7"], ["2", "13"], ["3", "19"],
                    ["4", "31"], ["5", "37"]]
    assert out.startswith("# epsclass ")


def test_primes_mv(capsys):
    code, out = run(["primes", "--p", "5", "--count", "50", "--mv"], capsys)
    assert code == 0
    assert config_of(out)["mv_holds"] == "True"


def test_quad_maxima_first_rows(capsys):
    code, out = run(["quad-maxima", "--stat", "genus", "--eps", "0.05",
                     "--max-d", "4000"], capsys)
    assert code == 0
    _, rows = rows_of(out)
    assert [int(r[0]) for r in rows[:4]] == [-3, -23, -47, -71]


def test_quad_maxima_workers_deterministic(capsys):
    args = ["quad-maxima", "--stat", "genus", "--eps", "0.05",
            "--max-d", "3000"]
    _, out1 = run(args + ["--workers", "1"], capsys)
    _, out2 = run(args + ["--workers", "3"], capsys)
    # header differs only in the workers entry; rows must be identical
    assert rows_of(out1) == rows_of(out2)


def test_quad_scan_emits_all_fundamental(capsys):
    code, out = run(["quad-scan", "--stat", "raw", "--max-d", "100"], capsys)
    assert code == 0
    _, rows = rows_of(out)
    by_d = {int(r[0]): r for r in rows}
    assert by_d[-23][1] == "3"
    assert all(int(r[1]) >= 1 for r in rows)


def test_tor_scan_cli(capsys):
    code, out = run(["tor-scan", "--p", "2", "--min-d", "1000000",
                     "--max-d", "1000200"], capsys)
    assert code == 0
    _, rows = rows_of(out)
    assert [(int(r[0]), int(r[2])) for r in rows] == \
        [(-1000011, 3), (-1000020, 3), (-1000036, 4), (-1000132, 5)]


def test_tor_scan_workers_deterministic(capsys):
    args = ["tor-scan", "--p", "2", "--min-d", "1000000",
            "--max-d", "1000150"]
    _, out1 = run(args + ["--workers", "1"], capsys)
    _, out2 = run(args + ["--workers", "4"], capsys)
    assert rows_of(out1) == rows_of(out2)


def test_tor_family(capsys):
    code, out = run(["tor-family", "--p", "2", "--count", "4"], capsys)
    assert code == 0
    _, rows = rows_of(out)
    assert [r[1] for r in rows] == ["-3", "-15", "105", "-1155"]
    assert rows[3][2] == "[2,2,2]"


def test_bounds(capsys):
    code, out = run(["bounds", "--p", "7", "--eps", "0.1"], capsys)
    assert code == 0
    cfg = config_of(out)
    assert abs(float(cfg["N0"]) - 2.935394e16) < 0.002 * 2.935394e16
    header, rows = rows_of(out)
    assert header == ["N", "X", "X0", "Y0", "logC_required"]
    assert len(rows) >= 17


def test_cubic_enum(capsys):
    code, out = run(["cubic-enum", "--f", "7"], capsys)
    assert code == 0
    _, rows = rows_of(out)
    assert len(rows) == 1 and rows[0][:3] == ["7", "-1", "1"]
    code, out = run(["cubic-enum", "--max-f", "100"], capsys)
    _, rows = rows_of(out)
    assert ["63", "2", "3"] in [r[:3] for r in rows]


def test_cubic_validate_and_fixtures_check(capsys):
    code, out = run(["cubic-validate"], capsys)
    assert code == 0
    assert config_of(out)["ok"] == "True"
    code, out = run(["fixtures-check"], capsys)
    assert code == 0
    _, rows = rows_of(out)
    assert len(rows) == 17


def test_filtration_run(capsys):
    code, out = run(["filtration-run", "--d", "-1155"], capsys)
    assert code == 0
    cfg = config_of(out)
    assert cfg["routes_agree"] == "True" and cfg["identity_ok"] == "True"
    code, out = run(["filtration-run", "--p", "3", "--n", "3",
                     "--seed", "5"], capsys)
    assert code == 0


def test_filtration_mc_deterministic(capsys):
    args = ["filtration-mc", "--p", "3", "--n", "3", "--samples", "30",
            "--seed", "1"]
    _, out1 = run(args, capsys)
    _, out2 = run(args, capsys)
    assert out1 == out2
    _, rows = rows_of(out1)
    assert sum(int(r[1]) for r in rows) == 30


def test_reflection_check(capsys):
    code, out = run(["reflection-check", "--max-d", "400"], capsys)
    assert code == 0
    _, rows = rows_of(out)
    assert all(r[1] == "1" for r in rows)


def test_normic_search(capsys):
    code, out = run(["normic-search", "--p", "3", "--rho", "1", "--q", "2",
                     "--max-a", "5"], capsys)
    assert code == 0
    _, rows = rows_of(out)
    assert rows and all(r[6] == "" for r in rows)


def test_json_format(capsys):
    code, out = run(["primes", "--p", "3", "--count", "3",
                     "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["tool"] == "epsclass" and doc["fields"] == ["k", "ell"]
    assert doc["rows"] == [["1", "7"], ["2", "13"], ["3", "19"]]
    assert doc["config"]["p"] == "3"


def test_output_file(tmp_path, capsys):
    path = tmp_path / "out.csv"
    code, _ = run(["primes", "--p", "3", "--count", "3",
                   "--output", str(path)], capsys)
    assert code == 0
    text = path.read_text()
    assert text.startswith("# epsclass ") and text.endswith("3,19\n")


def test_budget_exit_code(monkeypatch, capsys):
    def boom(*a, **k):
        raise ClassNumberCapError("cap")
    monkeypatch.setattr(quadclass, "scan_arrays", boom)
    code, _ = run(["quad-scan", "--stat", "raw", "--max-d", "50"], capsys)
    assert code == 3
