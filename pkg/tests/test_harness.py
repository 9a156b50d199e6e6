import json
import textwrap

import pytest

from busyloss import harness
from busyloss.harness import cli
from busyloss.harness.report import strip_timing

DM = """\
seed = 7
replications = 4000
alpha = 0.001
n_values = [0, 1]
claims = {claims}

[model.interarrival]
family = "deterministic"
value = 1.0

[model.service]
family = "exponential"
rate = 1.25

[output]
format = "{fmt}"
"""

MODEL_MM = """\
[model]
buffer = 3

[model.interarrival]
family = "exponential"
rate = 1.0

[model.service]
family = "exponential"
rate = 2.0
"""


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _dm(claims, fmt="json"):
    return DM.format(claims=json.dumps(claims), fmt=fmt)


def test_loads_valid_config():
    cfg = harness.loads(_dm(["two-sided", "wald-consistency"]))
    assert cfg.n_values == [0, 1]
    assert cfg.model.rho == pytest.approx(0.8)
    assert cfg.claims == ["two-sided", "wald-consistency"]
    assert cfg.as_dict()["seed"] == 7


@pytest.mark.parametrize(
    "edit,line,needle",
    [
        (lambda t: t.replace('claims = ["two-sided"]', 'claims = ["two-sided", "bogus"]'), 5, "unknown claim"),
        (lambda t: t.replace("rate = 1.25", "rate = -1.25"), 11, "service"),
        (lambda t: t.replace("alpha = 0.001", "alpha = 2.0"), 3, "alpha"),
        (lambda t: t.replace("n_values = [0, 1]", "n_values = [0, -1]"), 4, "n_values"),
        (lambda t: t.replace('format = "json"', 'format = "xml"'), 16, "format"),
        (lambda t: "colour = 3\n" + t, 1, "unknown key"),
        (lambda t: t.replace("n_values = [0, 1]", "n_values = [0, 1"), 5, ""),
    ],
)
def test_config_errors_carry_line_numbers(edit, line, needle):
    text = edit(_dm(["two-sided"]))
    with pytest.raises(harness.ConfigError) as exc:
        harness.loads(text, "cfg.toml")
    msg = str(exc.value)
    assert msg.startswith(f"cfg.toml:{line}:"), msg
    assert needle in msg


def test_cli_config_error_exits_2(tmp_path, capsys):
    path = _write(tmp_path, "bad.toml", _dm(["nope"]))
    assert cli.main(["verify", "--config", path]) == 2
    assert "bad.toml:5:" in capsys.readouterr().err


def test_cli_usage_errors_exit_2(tmp_path, capsys):
    assert cli.main([]) == 2
    assert cli.main(["verify"]) == 2
    assert cli.main(["verify", "--config", str(tmp_path / "missing.toml")]) == 2
    model = _write(tmp_path, "m.toml", MODEL_MM)
    assert cli.main(["branching", "--process", "compound", "--n", "1"]) == 2
    assert cli.main(["simulate", "--model", model, "--format", "yaml"]) == 2
    capsys.readouterr()


def test_skip_gating_exits_zero(tmp_path, capsys):
    # Erlang(2) interarrival with Det service: none of the service-exponential claims apply
    text = _dm(["gim1-upper", "two-sided", "gw-lower"]).replace(
        'family = "exponential"\nrate = 1.25', 'family = "deterministic"\nvalue = 0.5')
    path = _write(tmp_path, "skip.toml", text)
    assert cli.main(["verify", "--config", path, "--no-timing"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["summary"] == {"pass": 0, "fail": 0, "skip": 6}
    reasons = {e["reason"] for e in report["entries"]}
    assert "needs exponential service" in reasons


def test_gw_upper_skipped_for_deterministic_arrivals():
    rep = harness.run_experiment(harness.loads(_dm(["gw-upper", "compound"])), include_timing=False)
    assert [e["status"] for e in rep.entries] == ["skip"] * 4
    assert rep.entries[0]["reason"] == "needs interarrival NWU and service NBU"
    assert rep.entries[2]["reason"] == "needs exponential interarrival times"
    assert not rep.failed


def test_verify_passes_and_is_byte_identical(tmp_path, capsys):
    claims = ["gw-lower", "gim1-upper", "two-sided", "lemma-4.1-monotonicity", "wald-consistency", "mean-bounds"]
    path = _write(tmp_path, "dm.toml", _dm(claims))
    outs = []
    for workers in ("1", "4"):
        out = tmp_path / f"r{workers}.json"
        assert cli.main(["verify", "--config", path, "--no-timing", "--workers", workers, "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    rep = json.loads(outs[0])
    assert rep["summary"]["fail"] == 0
    assert "timing" not in rep


@pytest.mark.parametrize("fmt", ["json", "csv", "text"])
def test_strip_timing_makes_runs_comparable(tmp_path, fmt):
    cfg = harness.loads(_dm(["two-sided"], fmt))
    a = harness.run_experiment(cfg).render(fmt)
    b = harness.run_experiment(cfg).render(fmt)
    assert "timing" in a
    assert strip_timing(a, fmt) == strip_timing(b, fmt)
    assert strip_timing(a, fmt) == harness.run_experiment(cfg, include_timing=False).render(fmt)


def test_seed_override_changes_numbers(tmp_path, capsys):
    path = _write(tmp_path, "dm.toml", _dm(["two-sided"]))
    cli.main(["verify", "--config", path, "--no-timing"])
    a = capsys.readouterr().out
    cli.main(["--seed", "8", "verify", "--config", path, "--no-timing"])
    b = capsys.readouterr().out
    cli.main(["verify", "--config", path, "--no-timing", "--seed", "8"])
    c = capsys.readouterr().out
    assert a != b and b == c
    assert json.loads(b)["meta"]["seed"] == 8


def test_claims_use_separate_streams():
    one = harness.run_experiment(harness.loads(_dm(["two-sided"])), include_timing=False)
    two = harness.run_experiment(harness.loads(_dm(["wald-consistency", "two-sided"])), include_timing=False)
    assert one.entries == two.entries[2:]


def test_failing_claim_exits_one(tmp_path, capsys, monkeypatch):
    from busyloss import analytics
    from busyloss.harness import runner

    real = analytics.bounds_for

    def wrong(model, n=None):
        # an upper bound far below the true mean must be caught
        bs = real(model, n)
        bs.EL_upper = bs.EL_lower = 1e-6
        return bs

    monkeypatch.setattr(runner.analytics, "bounds_for", wrong)
    path = _write(tmp_path, "dm.toml", _dm(["two-sided"]))
    assert cli.main(["verify", "--config", path, "--no-timing"]) == 1
    report = json.loads(capsys.readouterr().out)
    assert report["summary"]["fail"] == 2


def test_report_renderings():
    rep = harness.run_experiment(harness.loads(_dm(["two-sided", "wald-consistency"])), include_timing=False)
    text = rep.to_text(False)
    assert "two-sided" in text and "pass 4  fail 0  skip 0" in text
    csv_text = rep.to_csv(False)
    assert csv_text.splitlines()[0].startswith("claim,n,status")
    assert len(csv_text.splitlines()) == 5
    d = json.loads(rep.to_json())
    assert d["meta"]["model"].endswith("/1/n")
    with pytest.raises(ValueError):
        rep.render("xml")


def test_cli_bounds(tmp_path, capsys):
    model = _write(tmp_path, "m.toml", MODEL_MM)
    assert cli.main(["bounds", "--model", model]) == 0
    out = capsys.readouterr().out
    rec = json.loads(out.strip().splitlines()[-1])
    assert rec["bounds"][0]["EL_lower"] == pytest.approx(0.0625)
    assert cli.main(["bounds", "--model", model, "--n", "0", "1", "--format", "csv"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[0].startswith("n,r,phi") and len(rows) == 3


def test_cli_simulate(tmp_path, capsys):
    model = _write(tmp_path, "m.toml", MODEL_MM)
    records = tmp_path / "per_period.csv"
    argv = ["simulate", "--model", model, "--n", "0", "--reps", "20000", "--seed", "3", "--format", "json",
            "--csv", str(records)]
    assert cli.main(argv) == 0
    res = json.loads(capsys.readouterr().out)["results"][0]
    assert abs(res["losses"]["mean"] - 0.5) < 2 * res["losses"]["ci_halfwidth"]
    lines = records.read_text().splitlines()
    assert lines[0] == "n,rep,losses,served,duration,truncated"
    assert len(lines) == 20001


def test_cli_branching(tmp_path, capsys):
    samples = tmp_path / "x.txt"
    argv = ["branching", "--process", "geometric-gw", "--r", "0.3333333333333333", "--n", "2", "--reps", "50000",
            "--format", "json", "--samples", str(samples)]
    assert cli.main(argv) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["expected_mean"] == pytest.approx(0.25)
    assert abs(rec["mean"] - 0.25) < 2 * rec["ci_halfwidth"]
    assert len(samples.read_text().splitlines()) == 50000
    model = _write(tmp_path, "m.toml", MODEL_MM)
    for proc in ("compound", "gim1-type"):
        assert cli.main(["branching", "--process", proc, "--model", model, "--n", "1", "--reps", "20000"]) == 0
        assert "expected" in capsys.readouterr().out


def test_packaged_demo_config_loads():
    import pathlib

    root = pathlib.Path(__file__).resolve().parents[1] / "demos" / "configs"
    for path in sorted(root.glob("*.toml")):
        cfg = harness.load(path)
        assert cfg.claims and cfg.n_values, path


def test_config_example_text_is_documented():
    text = textwrap.dedent(cli.__doc__)
    assert "Exit codes" in text
