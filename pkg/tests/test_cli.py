import json
import os

import numpy as np
import pytest

from structlabor import derive_seed, sha256_file
from structlabor.cli import main

TINY_ROY = {
    "roy": {
        "n_initial": 3, "T": 6, "eval_window": 3, "n_workers": 40,
        "replications": 2, "factor": 2.0,
    }
}

SMALL_PORTFOLIO = {
    "portfolio": {"n_families": 3, "T": 10, "entry": {"mu": 0.3}},
    "priors": {"n_draws": 500},
}


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def read_json(out, name):
    with open(os.path.join(out, name), encoding="utf-8") as fh:
        return json.load(fh)


def test_steady_state_writes_golden_values(tmp_path, capsys):
    out = str(tmp_path / "out")
    assert main(["steady-state", "--out", out]) == 0
    blob = read_json(out, "steady_state.json")
    assert blob["steady_state"]["s_star"] == 0.05809450038729667
    assert blob["steady_state"]["k_star"] == 0.0774593338497289
    assert blob["comparative_statics"]["ds_dgamma"] == 1.0943905882409413
    assert blob["params"]["alpha"] == 0.36
    printed = capsys.readouterr().out
    assert "s* = 0.058095" in printed
    assert "wrote" in printed


def test_manifest_lists_correct_digests(tmp_path):
    out = str(tmp_path / "out")
    assert main(["steady-state", "--out", out, "--quiet"]) == 0
    manifest = read_json(out, "run.manifest.json")
    assert manifest["command"] == "steady-state"
    assert manifest["seed"] == 0
    assert len(manifest["config_sha256"]) == 64
    for entry in manifest["outputs"]:
        assert entry["sha256"] == sha256_file(os.path.join(out, entry["path"]))


def test_quiet_suppresses_stdout(tmp_path, capsys):
    out = str(tmp_path / "out")
    assert main(["steady-state", "--out", out, "--quiet"]) == 0
    assert capsys.readouterr().out == ""


def test_calibrate_derives_its_stream_seed(tmp_path):
    cfg = write_config(tmp_path, {"priors": {"n_draws": 2000}})
    out = str(tmp_path / "out")
    assert main(["calibrate", "--config", cfg, "--out", out, "--quiet"]) == 0
    blob = read_json(out, "calibration.json")
    assert blob["stream_seed"] == derive_seed(0, "calibration")
    assert blob["stream_seed"] == 8611252015350264022
    assert blob["n_draws"] == 2000
    assert blob["stats"]["min"] >= blob["attainable_range_pct"][0]
    assert blob["stats"]["max"] <= blob["attainable_range_pct"][1]


def test_simulate_defaults_start_at_half_the_long_run(tmp_path):
    out = str(tmp_path / "out")
    assert main(["simulate", "--out", out, "--quiet"]) == 0
    blob = read_json(out, "transition.json")
    assert blob["initial"]["k0"] == pytest.approx(0.5 * blob["steady_state"]["k_star"])
    assert blob["converged"] is True
    assert blob["periods_to_converge"] == 38
    with open(os.path.join(out, "path.csv"), encoding="utf-8") as fh:
        header = fh.readline().strip()
    assert header == "t,k,L_S,L_U,Y,w_U,w_S"


def test_simulate_non_convergence_still_exits_zero(tmp_path, capsys):
    # Written as 1.5e-14 so the YAML scalar resolver reads it as a float.
    cfg = write_config(tmp_path, {"transition": {"T": 3, "tol": 1.5e-14}})
    out = str(tmp_path / "out")
    assert main(["simulate", "--config", cfg, "--out", out]) == 0
    blob = read_json(out, "transition.json")
    assert blob["converged"] is False
    assert blob["periods_to_converge"] is None
    assert "did not converge" in capsys.readouterr().out


def test_format_both_writes_csv_and_json(tmp_path):
    cfg = write_config(tmp_path, SMALL_PORTFOLIO)
    out = str(tmp_path / "out")
    assert main(["portfolio", "--config", cfg, "--out", out, "--format", "both", "--quiet"]) == 0
    for name in ("panel.csv", "panel.json", "capability.csv", "capability.json", "portfolio.json"):
        assert os.path.exists(os.path.join(out, name))
    panel = read_json(out, "panel.json")
    assert panel["columns"][:3] == ["family_id", "period", "maturity"]
    meta = read_json(out, "portfolio.json")
    assert meta["n_families_initial"] == 3
    assert meta["n_families_final"] >= 3


def test_roy_command_reports_paired_arms(tmp_path):
    cfg = write_config(tmp_path, TINY_ROY)
    out = str(tmp_path / "out")
    assert main(["roy", "--config", cfg, "--out", out, "--quiet"]) == 0
    blob = read_json(out, "roy.json")
    assert blob["treatment"] == "mu"
    assert blob["replications"] == 2
    assert len(blob["per_replication"]) == 2
    rep = blob["per_replication"][0]
    assert rep["variance_diff"] == pytest.approx(
        rep["treated"]["log_wage_variance"] - rep["base"]["log_wage_variance"]
    )
    assert isinstance(rep["base"]["converged"], bool)


def test_estimate_pipeline_mode_writes_indices(tmp_path):
    cfg = write_config(tmp_path, {
        "portfolio": {
            "n_families": 20, "T": 60, "entry": {"mu": 0.0},
            "drift": {"enabled": True},
        }
    })
    out = str(tmp_path / "out")
    assert main(["estimate", "--config", cfg, "--out", out, "--quiet"]) == 0
    blob = read_json(out, "hazard.json")
    assert blob["delta_hat"] > 0.0
    assert set(blob["components"]) == {"env", "tech", "org"}
    assert "tech=0,org=0" in blob["cells"]
    assert os.path.exists(os.path.join(out, "indices.csv"))
    assert os.path.exists(os.path.join(out, "births.csv"))
    with open(os.path.join(out, "births.csv"), encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    assert lines[0] == "t,births"
    assert lines[1] == "0,20"


def test_estimate_panel_file_mode(tmp_path):
    # First produce a panel, then estimate from the file alone.
    cfg = write_config(tmp_path, {
        "portfolio": {"n_families": 15, "T": 40, "entry": {"mu": 0.0}, "drift": {"enabled": True}},
    })
    out1 = str(tmp_path / "first")
    assert main(["portfolio", "--config", cfg, "--out", out1, "--quiet"]) == 0

    cfg2 = write_config(tmp_path, {
        "estimate": {"panel": os.path.join(out1, "panel.csv")},
    }, name="second.json")
    out2 = str(tmp_path / "second")
    assert main(["estimate", "--config", cfg2, "--out", out2, "--quiet"]) == 0
    blob = read_json(out2, "hazard.json")
    assert blob["n_obs"] > 0
    # File mode has no weights, so no indices series.
    assert not os.path.exists(os.path.join(out2, "indices.csv"))
    assert os.path.exists(os.path.join(out2, "births.csv"))


def test_estimate_missing_panel_is_a_runtime_error(tmp_path, capsys):
    cfg = write_config(tmp_path, {"estimate": {"panel": str(tmp_path / "nowhere.csv")}})
    out = str(tmp_path / "out")
    assert main(["estimate", "--config", cfg, "--out", out, "--quiet"]) == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["kind"] == "io"


def test_bad_config_value_exits_two_with_json_error(tmp_path, capsys):
    cfg = write_config(tmp_path, {"baseline": {"gamma": 1.5}})
    assert main(["steady-state", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["kind"] == "config"
    assert err["error"]["path"] == "baseline"
    assert "gamma must lie in (0, 1)" in err["error"]["message"]


def test_unknown_key_error_names_the_path(tmp_path, capsys):
    cfg = write_config(tmp_path, {"portfolio": {"entry": {"mus": 0.1}}})
    assert main(["portfolio", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["path"] == "portfolio.entry.mus"


def test_usage_errors_follow_the_json_contract(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    err = json.loads(capsys.readouterr().err.splitlines()[-1])
    assert err["error"]["kind"] == "config"


def test_seed_override_changes_outputs(tmp_path):
    cfg = write_config(tmp_path, SMALL_PORTFOLIO)
    out_a = str(tmp_path / "a")
    out_b = str(tmp_path / "b")
    out_c = str(tmp_path / "c")
    assert main(["portfolio", "--config", cfg, "--out", out_a, "--quiet"]) == 0
    assert main(["portfolio", "--config", cfg, "--out", out_b, "--quiet", "--seed", "1"]) == 0
    assert main(["portfolio", "--config", cfg, "--out", out_c, "--quiet"]) == 0
    same = sha256_file(os.path.join(out_a, "panel.csv"))
    assert sha256_file(os.path.join(out_c, "panel.csv")) == same
    assert sha256_file(os.path.join(out_b, "panel.csv")) != same
    # The recorded config digest moves with the seed.
    da = read_json(out_a, "run.manifest.json")["config_sha256"]
    db = read_json(out_b, "run.manifest.json")["config_sha256"]
    assert da != db


def test_out_env_var_supplies_the_default_directory(tmp_path, monkeypatch):
    target = str(tmp_path / "from_env")
    monkeypatch.setenv("STRUCTLABOR_OUT", target)
    assert main(["steady-state", "--quiet"]) == 0
    assert os.path.exists(os.path.join(target, "steady_state.json"))
    # An explicit flag still wins.
    explicit = str(tmp_path / "explicit")
    assert main(["steady-state", "--quiet", "--out", explicit]) == 0
    assert os.path.exists(os.path.join(explicit, "steady_state.json"))


def test_out_directory_collision_is_an_io_error(tmp_path, capsys):
    blocker = tmp_path / "blocked"
    blocker.write_text("a file, not a directory")
    assert main(["steady-state", "--out", str(blocker), "--quiet"]) == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["kind"] == "io"


def test_identical_runs_are_byte_identical(tmp_path):
    cfg = write_config(tmp_path, SMALL_PORTFOLIO)
    outs = [str(tmp_path / n) for n in ("r1", "r2")]
    for out in outs:
        assert main(["portfolio", "--config", cfg, "--out", out, "--quiet", "--format", "both"]) == 0
    m1 = read_json(outs[0], "run.manifest.json")
    m2 = read_json(outs[1], "run.manifest.json")
    assert [e["sha256"] for e in m1["outputs"]] == [e["sha256"] for e in m2["outputs"]]
