import json

import pandas as pd
import pytest

from main import run_cli

pytestmark = pytest.mark.usefixtures("restore_root_logging")


def test_table1_exit_code_and_header(tmp_path):
    out = tmp_path / "table1.csv"
    code = run_cli(["table1", "--vp", "1", "--deltas", "0,0.9,0.99,0.999", "--out", str(out), "--quiet"])

    assert code == 0
    assert out.read_text().splitlines()[0] == "delta,d_eng_pct,d_util_pct"
    table = pd.read_csv(out)
    assert table["d_eng_pct"].tolist() == pytest.approx([-10.6, -1.2, -0.12, -0.011], abs=0.05)


def test_csv_survives_a_pandas_round_trip(tmp_path):
    out = tmp_path / "table1.csv"
    assert run_cli(["table1", "--out", str(out), "--quiet"]) == 0

    again = tmp_path / "again.csv"
    pd.read_csv(out).to_csv(again, index=False, float_format="%.17g", lineterminator="\n")
    assert again.read_bytes() == out.read_bytes()


def test_figure1_json_and_svg(tmp_path):
    out = tmp_path / "figure1.json"
    code = run_cli(["figure1", "--delta", "0.99", "--format", "json", "--svg", "--out", str(out), "--quiet"])

    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["config"]["delta"] == 0.99
    assert [row["policy"] for row in payload["rows"]] == ["app", "pear"]
    assert payload["notes"]["util_annotation"] == "53.44% gain in utility"
    assert (tmp_path / "figure1.svg").exists()


def test_config_file_under_flags(tmp_path):
    config = tmp_path / "run.conf"
    config.write_text("vp=2\ndeltas=0.5\n")
    out = tmp_path / "table1.json"

    code = run_cli(["table1", "--config", str(config), "--deltas", "0", "--format", "json", "--out", str(out)])

    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["config"]["v_pop"] == 2.0
    assert payload["config"]["deltas"] == [0.0]


@pytest.mark.parametrize("args", [
    ["table1", "--deltas", "1.5"],
    ["table1", "--bogus"],
    ["nope"],
    ["figure34", "--xi", "0.5"],
    ["figure34", "--explore-len", "5", "--xi", "1.0"],
    ["simulate", "--policy", "greedy"],
    ["simulate", "--niche", "gpd:0.5", "--policy", "pear"],
    ["table1", "--config", "does-not-exist.conf"],
])
def test_invalid_arguments_exit_one(tmp_path, args):
    assert run_cli(args + ["--out", str(tmp_path / "out.csv")]) == 1


def test_unknown_config_key_exits_one(tmp_path):
    config = tmp_path / "run.conf"
    config.write_text("colour=blue\n")

    assert run_cli(["table1", "--config", str(config), "--out", str(tmp_path / "out.csv")]) == 1


def test_unwritable_output_exits_two(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")

    assert run_cli(["table1", "--out", str(blocker / "sub" / "table1.csv"), "--quiet"]) == 2


def test_wide_interval_exits_three(tmp_path):
    out = tmp_path / "simulate.csv"
    code = run_cli([
        "simulate", "--policy", "pear", "--p", "0.1", "--delta", "0.5",
        "--episodes", "50", "--ci-threshold", "1e-9", "--out", str(out), "--quiet",
    ])

    assert code == 3
    table = pd.read_csv(out)
    assert table["metric"].tolist() == ["engagement", "utility"]
    assert (table["episodes"] == 50).all()


def test_figure34_single_length(tmp_path):
    out = tmp_path / "figure34.csv"
    code = run_cli([
        "figure34", "--delta", "0", "--xi", "0,0.5", "--explore-len", "5",
        "--episodes", "100", "--ci-threshold", "10", "--out", str(out), "--quiet",
    ])

    assert code == 0
    table = pd.read_csv(out)
    assert table["delta"].tolist() == [0.0, 0.0]
    assert table["xi"].tolist() == [0.0, 0.5]
