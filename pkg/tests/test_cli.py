import json
import math

import pytest

from costcode.cli import COMMAND_TABLE, run


@pytest.fixture
def files(tmp_path):
    def write(name, doc):
        p = tmp_path / name
        p.write_text(json.dumps(doc))
        return str(p)

    return {
        "unit": write("unit.json", {"K": 2, "costs": [1, 1]}),
        "c12": write("c12.json", {"K": 2, "costs": [1, 2]}),
        "cond_ok": write(
            "cond_ok.json",
            {"K": 2, "costs": [1, 2], "conditional": {"0": [1, 2], "1": [1, 2]}},
        ),
        "cond_bad": write(
            "cond_bad.json",
            {"K": 2, "costs": [1, 1], "conditional": {"1": [1, 2]}},
        ),
        "bern25": write("bern25.json", {"type": "iid", "pmf": [0.75, 0.25]}),
        "mixed": write(
            "mixed.json",
            {
                "type": "mixed",
                "weights": [0.4, 0.6],
                "components": [
                    {"type": "iid", "pmf": [0.5, 0.5]},
                    {"type": "iid", "pmf": [0.89, 0.11]},
                ],
            },
        ),
        "dir": tmp_path,
    }


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_capacity_unit_costs(files, capsys):
    assert run(["capacity", "--costs", files["unit"]]) == 0
    doc = _json_out(capsys)
    assert doc["alpha_c"] == 1.0
    assert doc["symbol_measure"] == [0.5, 0.5]


def test_capacity_log_base_rescales(files, capsys):
    assert run(["capacity", "--costs", files["unit"], "--log-base", str(math.e)]) == 0
    doc = _json_out(capsys)
    assert doc["alpha_c"] == pytest.approx(math.log(2), abs=1e-12)


def test_capacity_conditional_validation(files, capsys):
    assert run(["capacity", "--costs", files["cond_ok"]]) == 0
    doc = _json_out(capsys)
    assert doc["conditional_rows"] == ["0", "1"]
    code = run(["capacity", "--costs", files["cond_bad"]])
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConditionalCapacityError"


def test_threshold_second_median_is_zero(files, capsys):
    assert run(
        ["threshold", "second", "--source", files["bern25"], "--costs", files["c12"], "--eps", "0.5"]
    ) == 0
    doc = _json_out(capsys)
    assert doc["value"] == pytest.approx(0.0, abs=1e-12)
    assert doc["case"] == "iid"


def test_threshold_first_mixed(files, capsys):
    assert run(
        ["threshold", "first", "--source", files["mixed"], "--costs", files["unit"], "--eps", "0.7"]
    ) == 0
    doc = _json_out(capsys)
    assert doc["value"] == pytest.approx(0.499915958164528, abs=1e-12)


def test_code_round_trip_via_cli(files, capsys):
    base = ["--source", files["bern25"], "--costs", files["c12"], "--n", "4"]
    assert run(["code", "encode", *base, "--sequence", "0110"]) == 0
    word = _json_out(capsys)["codeword"]
    assert run(["code", "decode", *base, "--codeword", word]) == 0
    assert _json_out(capsys)["sequence"] == "0110"
    assert run(["code", "kraft", *base]) == 0
    assert _json_out(capsys)["kraft_sum"] <= 1 + 1e-9


def test_code_build_csv(files, tmp_path):
    out = tmp_path / "table.csv"
    assert run(
        ["code", "build", "--source", files["bern25"], "--costs", files["c12"],
         "--n", "3", "--output", str(out)]
    ) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "sequence,codeword,cost"
    assert len(lines) == 1 + 8


def test_spectrum_determinism_and_plot(files, tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    fig = tmp_path / "curve.png"
    args = [
        "spectrum", "second", "--source", files["mixed"], "--costs", files["unit"],
        "--n", "2000", "--a", "0.8", "--grid=-1,0,1", "--mode", "monte-carlo",
        "--samples", "20000", "--seed", "7",
    ]
    assert run([*args, "--output", str(out1), "--plot", str(fig)]) == 0
    assert run([*args, "--output", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert fig.stat().st_size > 1000


def test_overflow_csv(files, capsys):
    assert run(
        ["overflow", "--source", files["bern25"], "--costs", files["unit"], "--n", "5",
         "--eta", "2.5", "--eta", "4.5"]
    ) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "eta,probability,stderr,method"
    assert len(lines) == 3
    assert all(line.endswith("exact") for line in lines[1:])


def test_overflow_surrogate_and_plot(files, tmp_path):
    fig = tmp_path / "overflow.png"
    out = tmp_path / "overflow.csv"
    assert run(
        ["overflow", "--source", files["bern25"], "--costs", files["unit"], "--n", "2000",
         "--eta", "1500", "--eta", "1700", "--eta", "1900", "--method", "surrogate-mc",
         "--samples", "20000", "--seed", "3", "--output", str(out), "--plot", str(fig)]
    ) == 0
    assert "surrogate-mc" in out.read_text()
    assert fig.stat().st_size > 1000


def test_lemma_bounds_csv(files, capsys):
    assert run(
        ["lemma-bounds", "--source", files["bern25"], "--costs", files["c12"], "--n", "4",
         "--eta", "5", "--z", "0.1", "--z", "0.01"]
    ) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "eta,z,lower_raw,lower,upper_raw,upper,method"
    assert len(lines) == 3


def test_lemma_bounds_plot(files, tmp_path):
    fig = tmp_path / "sandwich.png"
    out = tmp_path / "bounds.csv"
    assert run(
        ["lemma-bounds", "--source", files["bern25"], "--costs", files["c12"], "--n", "4",
         "--eta", "4", "--eta", "6", "--eta", "8", "--z", "0.05",
         "--output", str(out), "--plot", str(fig)]
    ) == 0
    assert fig.stat().st_size > 1000


def test_equiv_vl2fl_and_fl2vl(files, capsys):
    assert run(
        ["equiv", "vl2fl", "--source", files["bern25"], "--costs", files["c12"],
         "--n", "5", "--eta", "7.0"]
    ) == 0
    doc = _json_out(capsys)
    assert doc["error_probability"] == doc["exact_overflow"]
    assert doc["log_size"] <= doc["capacity_bound"] + 1e-9

    assert run(
        ["equiv", "fl2vl", "--source", files["bern25"], "--costs", files["c12"],
         "--n", "5", "--size", "8"]
    ) == 0
    doc = _json_out(capsys)
    assert doc["max_member_cost"] <= doc["certificate_threshold"]
    assert doc["overflow_at_threshold"] <= doc["error_bound"] + 1e-12


def test_diagnose_strong_converse(files, tmp_path, capsys):
    csv_out = tmp_path / "gaps.csv"
    fig = tmp_path / "gaps.png"
    assert run(
        ["diagnose", "strong-converse", "--source", files["mixed"], "--costs", files["unit"],
         "--n-list", "500,5000", "--delta", "0.05", "--samples", "20000",
         "--csv-output", str(csv_out), "--plot", str(fig)]
    ) == 0
    doc = _json_out(capsys)
    assert doc["verdict"] == "two-peak"
    assert csv_out.read_text().startswith("n,quantile_low,quantile_high,gap")
    assert fig.stat().st_size > 1000


def test_spectrum_range_grid(files, capsys):
    assert run(
        ["spectrum", "first", "--source", files["bern25"], "--costs", files["unit"],
         "--n", "4", "--grid", "0.4:1.2:0.1", "--mode", "exact"]
    ) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1 + 9  # header + inclusive 0.4..1.2 by 0.1


def test_missing_file_is_config_error(files, capsys):
    assert run(["capacity", "--costs", str(files["dir"] / "nope.json")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["exit_code"] == 2


def test_numeric_failure_maps_to_exit_3(files, capsys, monkeypatch):
    from costcode import PrecisionExhausted
    from costcode import cli as cli_mod

    def boom(dist, model, bits=None):
        raise PrecisionExhausted("forced")

    monkeypatch.setattr(cli_mod.codec, "build_exact_code", boom)
    code = run(["code", "build", "--source", files["bern25"], "--costs", files["unit"], "--n", "3"])
    assert code == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "PrecisionExhausted"
    assert err["exit_code"] == 3


def test_bad_eps_is_config_error(files, capsys):
    code = run(
        ["threshold", "first", "--source", files["mixed"], "--costs", files["unit"], "--eps", "0.4"]
    )
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "AnalysisError"


def test_bad_flag_is_config_error(files, capsys):
    assert run(["capacity"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert "required" in err["message"]


def test_command_table_covers_every_operation():
    expected_ops = {
        "solve_cost_capacity", "symbol_measure", "validate_conditional_model",
        "log_prob", "entropy", "varentropy", "sample_self_info", "enumerate_support",
        "gaussian_cdf", "gaussian_quantile",
        "first_order_spectrum", "second_order_spectrum", "strong_converse_diagnostic",
        "build_exact_code", "encode", "decode", "kraft_sum", "overflow",
        "first_order_threshold", "second_order_threshold",
        "vl_to_fl", "fl_to_vl", "lemma_bounds",
    }
    assert set(COMMAND_TABLE) == expected_ops
    known = {
        "capacity", "code build", "code encode", "code decode", "code kraft",
        "overflow", "spectrum first", "spectrum second", "threshold first",
        "threshold second", "equiv vl2fl", "equiv fl2vl", "lemma-bounds",
        "diagnose strong-converse",
    }
    assert set(COMMAND_TABLE.values()) <= known


@pytest.mark.parametrize("command", sorted(set(COMMAND_TABLE.values())))
def test_every_mapped_subcommand_is_registered(command, capsys):
    # invoking with no flags must fail on missing arguments, not unknown command
    assert run(command.split()) == 2
    err = json.loads(capsys.readouterr().err)
    assert "invalid choice" not in err["message"]
