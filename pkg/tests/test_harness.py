import csv
import io
import json

import pytest

from wuhan_qsdc.cli import main
from wuhan_qsdc.harness import (
    SCENARIOS,
    TRIAL_FIELDS,
    ScenarioError,
    aggregate,
    emit_report,
    make_scenario,
    run_scenario,
    run_trial,
)


def test_builtin_names():
    assert list(SCENARIOS) == [
        "honest-w", "honest-xi", "eve-ir-bz", "eve-ir-bx", "eve-probe", "oca-xi", "oca-w"]


@pytest.mark.parametrize(
    "name,kw",
    [("nope", {}), ("honest-w", {"message": "01a"}), ("honest-w", {"trials": 0}),
     ("honest-w", {"check_fraction": 1.0}), ("honest-w", {"message": "01", "msg_len": 3}),
     ("oca-w", {"sequence_length": 100}), ("honest-w", {"sequence_length": 1}),
     ("honest-w", {"master_seed": -1})],
)
def test_invalid_scenarios(name, kw):
    with pytest.raises(ScenarioError):
        make_scenario(name, **kw)


def test_oca_requires_matching_state():
    from wuhan_qsdc.harness import Scenario
    from wuhan_qsdc.attacks import AttackKind
    from wuhan_qsdc.states import InitialStateKind
    with pytest.raises(ScenarioError):
        Scenario("x", InitialStateKind.W, AttackKind.OCA_XI).validate()


def test_honest_w_example():
    report = run_scenario(make_scenario("honest-w", message="010110", trials=100, master_seed=1))
    agg = report.aggregates
    assert agg["completed"] == 100
    assert agg["ber_pooled"] == 0.0
    assert abs(agg["yield_pooled"] - 2 / 3) < agg["yield_halfwidth_3sigma"]
    assert agg["pair_fidelity_min"] > 1 - 1e-12


def test_aggregate_means_equal_trial_means():
    report = run_scenario(make_scenario("eve-probe", msg_len=16, trials=7, master_seed=3))
    for key in ("yield", "ber", "eve_correlation"):
        vals = [r[key] for r in report.trials if r[key] is not None]
        assert abs(report.aggregates[f"{key}_mean"] - sum(vals) / len(vals)) <= 1e-12


def test_trial_independence():
    sc = make_scenario("oca-w", msg_len=50, trials=6, master_seed=9)
    forward = [run_trial(sc, i) for i in range(6)]
    backward = [run_trial(sc, i) for i in reversed(range(6))][::-1]
    assert forward == backward
    assert aggregate(forward) == aggregate(backward)


def test_parallel_matches_serial():
    sc = make_scenario("eve-ir-bx", trials=4, master_seed=2)
    assert emit_report(run_scenario(sc, jobs=2)) == emit_report(run_scenario(sc))


def test_restarts_counted():
    report = run_scenario(make_scenario("eve-ir-bx", trials=3, max_restarts=2, master_seed=4))
    for row in report.trials:
        assert row["verdict"] == "aborted" and row["sessions"] == 3 and row["aborts"] == 3


def test_json_report_shape():
    report = run_scenario(make_scenario("honest-w", trials=1))
    doc = json.loads(emit_report(report, "json"))
    assert list(doc) == ["scenario", "trials", "aggregates"]
    assert doc["scenario"]["name"] == "honest-w"
    assert len(doc["trials"]) == 1
    assert list(doc["trials"][0])[: len(TRIAL_FIELDS)] == list(TRIAL_FIELDS)


def test_six_significant_digits():
    report = run_scenario(make_scenario("oca-w", msg_len=7, trials=1))
    doc = json.loads(emit_report(report))
    ber = doc["trials"][0]["ber"]
    assert ber == float(f"{ber:.6g}")


def test_csv_report():
    report = run_scenario(make_scenario("honest-xi", trials=3, master_seed=5))
    rows = list(csv.reader(io.StringIO(emit_report(report, "csv").decode())))
    assert rows[0] == ["scenario", *TRIAL_FIELDS]
    assert len(rows) == 4 and all(r[0] == "honest-xi" for r in rows[1:])


def test_unknown_format():
    with pytest.raises(ValueError):
        emit_report(run_scenario(make_scenario("honest-w")), "xml")


def test_byte_identical_reruns():
    for name in SCENARIOS:
        sc = make_scenario(name, trials=2, msg_len=8, master_seed=123)
        assert emit_report(run_scenario(sc)) == emit_report(run_scenario(sc))


def test_oca_counts_in_report():
    report = run_scenario(make_scenario("oca-xi", msg_len=200, trials=2))
    counts = report.aggregates["oca_counts"]
    assert sum(sum(v.values()) for v in counts.values()) == 400


# CLI

def test_cli_run_json(capsysbinary):
    assert main(["run", "--scenario", "honest-w", "--trials", "2", "--seed", "5"]) == 0
    doc = json.loads(capsysbinary.readouterr().out)
    assert doc["aggregates"]["trials"] == 2


def test_cli_out_file(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["run", "--scenario", "oca-w", "--msg-len", "20", "--format", "csv", "--out", str(out)]) == 0
    assert out.read_text().startswith("scenario,trial,")


def test_cli_validation_exit_code(capsys):
    assert main(["run", "--scenario", "honest-w", "--message", "0x1"]) == 2
    assert main(["run", "--scenario", "bogus"]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--scenario", "honest-w", "--message", "01", "--msg-len", "3"])
    assert exc.value.code == 2


def test_cli_list(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in SCENARIOS)


def test_cli_self_test(capsys):
    assert main(["self-test"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") == 6
