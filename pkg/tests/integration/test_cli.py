# tests/integration/test_cli.py

import json

import pytest

from src.cli.app import EXIT_USAGE, main
from src.cli.report import UNVERIFIED_BANNER

E1011 = ["--set", "10,11", "--degree", "4", "--h", "0.01", "--nu", "1", "--digits", "20", "--quiet"]
E12_UNVERIFIED = ["--set", "1,2", "--degree", "4", "--h", "0.05", "--nu", "2", "--digits", "17",
                  "--no-verify", "--quiet"]


def test_verified_run_exits_zero(capsys):
    assert main(E1011 + ["--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data['bracket']['overall_verified'] is True
    assert data['config']['digits'] == ['10', '11']


def test_unverified_run_exits_two(capsys):
    assert main(E12_UNVERIFIED) == 2
    assert capsys.readouterr().out.startswith(UNVERIFIED_BANNER)


@pytest.mark.parametrize("argv", [
    ["--bogus"],
    ["--degree", "6"],
    ["--set", "1,2", "--nu", "1", "--nu-prime", "2"],
    ["--set", "1,2", "--h", "-1"],
    ["--set", "1,2", "--digits", "10"],
    ["--batch", "no_such_file.toml"],
])
def test_usage_errors(argv, capsys):
    assert main(argv + ["--quiet"]) == EXIT_USAGE
    assert "用法错误" in capsys.readouterr().err


def test_save_dir(tmp_path, capsys):
    assert main(E1011 + ["--save-dir", str(tmp_path)]) == 0
    saved = tmp_path / "E_10_11__r4_h0.01.json"
    assert saved.exists()
    data = json.loads(saved.read_text(encoding='utf-8'))
    assert data['bracket']['overall_verified'] is True
    assert "[结果]" in capsys.readouterr().out


def test_batch_run(tmp_path, capsys):
    batch = tmp_path / "pair.toml"
    batch.write_text(
        "[defaults]\ndegree = 4\nh = \"0.01\"\nnu = 1\ndigits = 20\n\n"
        "[[rows]]\nset = [10, 11]\n"
        "expected = \"0.146921235390783463311108628515904073067083129676755\"\n",
        encoding='utf-8')
    out_dir = tmp_path / "out"
    assert main(["--batch", str(batch), "--save-dir", str(out_dir), "--quiet"]) == 0
    assert "E[10,11]" in capsys.readouterr().out
    assert (out_dir / "batch_pair.json").exists()
    assert (out_dir / "batch_pair.csv").exists()
