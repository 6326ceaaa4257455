import json

import pytest

from platecharge.cli import EXIT_DATA, EXIT_OK, EXIT_ORACLE, EXIT_USAGE, SEED_ENV, main
from platecharge.survey import CSV_HEADER, read_records_csv

NOISELESS = """\
sensor: {noise_fraction: 0.0, noise_floor_V: 0.0}
robot: {position_jitter_m: 0.0, height_jitter_m: 0.0, coupling_noise: 0.0}
handheld: {position_jitter_m: 0.0, height_jitter_m: 0.0, coupling_noise: 0.0}
"""


@pytest.fixture(autouse=True)
def no_seed_env(monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)


def simulate(out, *extra):
    return main(["simulate", "--out", str(out), *extra])


def test_simulate_transect_both(tmp_path):
    assert simulate(tmp_path) == EXIT_OK
    for platform in ("robot", "handheld"):
        lines = (tmp_path / f"records_transect_{platform}.csv").read_text().splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        assert len(lines) == 26


def test_simulate_factorial(tmp_path):
    assert simulate(tmp_path, "--experiment", "factorial", "--platform", "robot") == EXIT_OK
    assert len(read_records_csv(tmp_path / "records_factorial_robot.csv")) == 80
    assert not (tmp_path / "records_factorial_handheld.csv").exists()


def test_simulate_is_byte_identical(tmp_path):
    simulate(tmp_path / "a")
    simulate(tmp_path / "b")
    for name in ("records_transect_robot.csv", "records_transect_handheld.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_precedence(tmp_path, monkeypatch):
    simulate(tmp_path / "default", "--platform", "robot")
    monkeypatch.setenv(SEED_ENV, "7")
    simulate(tmp_path / "env", "--platform", "robot")
    simulate(tmp_path / "flag", "--platform", "robot", "--seed", "2021")
    name = "records_transect_robot.csv"
    env = read_records_csv(tmp_path / "env" / name)
    assert {r.seed for r in env} == {7}
    assert (tmp_path / "flag" / name).read_bytes() == (tmp_path / "default" / name).read_bytes()


def test_bad_seed_env(tmp_path, monkeypatch):
    monkeypatch.setenv(SEED_ENV, "abc")
    assert simulate(tmp_path) == EXIT_USAGE


def test_missing_config_leaves_no_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["simulate", "-c", str(tmp_path / "missing.yaml"), "-o", str(out)]) == EXIT_USAGE
    assert not out.exists()
    assert "missing.yaml" in capsys.readouterr().err


def test_invalid_config_message_has_line(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("seed: 3\nworld:\n  z_m: -1\n")
    assert main(["simulate", "-c", str(cfg), "-o", str(tmp_path / "o")]) == EXIT_USAGE
    assert f"{cfg}:3:" in capsys.readouterr().err


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert simulate(blocker / "sub") == EXIT_USAGE


def test_fit_noiseless_recovers_sigma(tmp_path, capsys):
    cfg = tmp_path / "quiet.yaml"
    cfg.write_text(NOISELESS)
    assert main(["simulate", "-c", str(cfg), "-o", str(tmp_path), "--platform", "robot"]) == EXIT_OK
    capsys.readouterr()
    assert main(["fit", str(tmp_path / "records_transect_robot.csv"), "-c", str(cfg), "-o", str(tmp_path)]) == EXIT_OK
    printed = json.loads(capsys.readouterr().out)
    saved = json.loads((tmp_path / "fit_records_transect_robot.json").read_text())
    assert printed == saved
    assert saved["sigma_pC_m2"] == pytest.approx(50.0, rel=1e-6)
    for key in ("sigma_se_pC_m2", "chi2", "dof", "positions"):
        assert key in saved
    assert saved["dof"] == 4
    assert (tmp_path / "summary_records_transect_robot.csv").exists()


def test_fit_single_position_is_data_error(tmp_path):
    path = tmp_path / "one.csv"
    path.write_text(",".join(CSV_HEADER) + "\n" + "".join(
        f"ROBOT,P2_FRONT,C,0.0,{i},false,false,0.{i + 1},1\n" for i in range(3)
    ))
    assert main(["fit", str(path), "-o", str(tmp_path)]) == EXIT_DATA


def test_fit_malformed_row_named(tmp_path, capsys):
    simulate(tmp_path, "--platform", "robot")
    path = tmp_path / "records_transect_robot.csv"
    lines = path.read_text().splitlines()
    lines[4] = lines[4].replace("false", "nope", 1)
    path.write_text("\n".join(lines) + "\n")
    capsys.readouterr()
    assert main(["fit", str(path), "-o", str(tmp_path)]) == EXIT_DATA
    assert "row 5" in capsys.readouterr().err


def test_fit_mixed_platforms(tmp_path):
    simulate(tmp_path)
    both = tmp_path / "both.csv"
    robot = (tmp_path / "records_transect_robot.csv").read_text()
    hand = (tmp_path / "records_transect_handheld.csv").read_text().split("\n", 1)[1]
    both.write_text(robot + hand)
    assert main(["fit", str(both), "-o", str(tmp_path)]) == EXIT_DATA


def test_compare_identical_files(tmp_path, capsys):
    simulate(tmp_path, "--platform", "robot")
    path = str(tmp_path / "records_transect_robot.csv")
    capsys.readouterr()
    assert main(["compare", path, path, "-o", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "comparison.json").read_text())
    assert report["variability_ratio"] == 1.0
    assert report["sigma_consistent"] is True


def test_compare_mismatch_and_empty(tmp_path):
    simulate(tmp_path)
    hand = tmp_path / "records_transect_handheld.csv"
    lines = [ln for ln in hand.read_text().splitlines() if ",E," not in ln]
    hand.write_text("\n".join(lines) + "\n")
    robot = str(tmp_path / "records_transect_robot.csv")
    assert main(["compare", robot, str(hand), "-o", str(tmp_path)]) == EXIT_DATA

    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["compare", str(empty), str(empty), "-o", str(tmp_path)]) == EXIT_DATA
    header_only = tmp_path / "header.csv"
    header_only.write_text(",".join(CSV_HEADER) + "\n")
    assert main(["compare", str(header_only), str(header_only), "-o", str(tmp_path)]) == EXIT_DATA


def test_summarize_by_condition(tmp_path, capsys):
    simulate(tmp_path, "--experiment", "factorial", "--platform", "robot")
    capsys.readouterr()
    path = str(tmp_path / "records_factorial_robot.csv")
    assert main(["summarize", path, "--by", "condition", "-o", str(tmp_path)]) == EXIT_OK
    rows = (tmp_path / "summary_records_factorial_robot_condition.csv").read_text().splitlines()
    assert len(rows) == 17


def test_missing_records_file(tmp_path):
    assert main(["fit", str(tmp_path / "nope.csv"), "-o", str(tmp_path)]) == EXIT_DATA


@pytest.mark.parametrize("check", ["eq1-limits", "fit-closed-form"])
def test_oracle_passes(check, capsys):
    assert main(["oracle", "--check", check]) == EXIT_OK
    assert "PASS" in capsys.readouterr().out


def test_oracle_failure_exit(monkeypatch, capsys):
    from platecharge import cli
    from platecharge.oracles import Check

    monkeypatch.setitem(cli.SUITES, "eq1-limits", lambda: [Check("forced", False, 1.0, 0.0)])
    assert main(["oracle", "--check", "eq1-limits"]) == EXIT_ORACLE
    assert "FAIL" in capsys.readouterr().out


def test_unknown_oracle_lists_names(capsys):
    with pytest.raises(SystemExit) as info:
        main(["oracle", "--check", "nonsense"])
    assert info.value.code == EXIT_USAGE
    err = capsys.readouterr().err
    assert "eq1-limits" in err and "quadrature" in err and "fit-closed-form" in err
