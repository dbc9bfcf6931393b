import json

import pytest

from persona_lab.cli import main
from persona_lab.experiment import CORE_FILES

SMALL = "population_per_group: 10\nrng_seed: 5\n"


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "small.yaml"
    p.write_text(SMALL)
    return p


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_init(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "init", tmp_path)
    assert code == 0 and json.loads(out)["config"].endswith("config.yaml")
    assert "population_per_group: 100" in (tmp_path / "config.yaml").read_text()
    code, _, err = run_cli(capsys, "init", tmp_path)
    assert code == 2 and "AlreadyExists" in err
    assert run_cli(capsys, "init", tmp_path, "--force")[0] == 0


def test_run_analyze_compare(tmp_path, capsys, cfg_file):
    r1, r2 = tmp_path / "r1", tmp_path / "r2"
    code, out, _ = run_cli(capsys, "run", "exp1", "--config", cfg_file, "--run-dir", r1, "--backend", "mock")
    summary = json.loads(out)
    assert code == 0 and summary["agents"] == 20 and summary["run_id"].startswith("exp1-")
    assert run_cli(capsys, "run", "exp2", "--config", cfg_file, "--run-dir", r2, "--backend", "mock")[0] == 0
    for name in CORE_FILES + ("manifest.json",):
        assert (r1 / name).exists()
    code, out, _ = run_cli(capsys, "analyze", "--run-dir", r1, "--dic", "demo")
    assert code == 0 and "stats/pb_top5.csv" in json.loads(out)["outputs"]
    first = (r1 / "stats" / "pb_top5.csv").read_bytes()
    run_cli(capsys, "analyze", "--run-dir", r1, "--dic", "demo")
    assert (r1 / "stats" / "pb_top5.csv").read_bytes() == first
    code, out, _ = run_cli(capsys, "compare", r1, r2)
    assert code == 0 and len(out.splitlines()) == 11
    code, _, _ = run_cli(capsys, "compare", r1, r2, "--out", tmp_path / "cmp.csv")
    assert (tmp_path / "cmp.csv").read_text() == out


def test_run_refuses_to_overwrite(tmp_path, capsys, cfg_file):
    d = tmp_path / "r"
    run_cli(capsys, "run", "exp1", "--config", cfg_file, "--run-dir", d, "--backend", "mock")
    code, _, err = run_cli(capsys, "run", "exp1", "--config", cfg_file, "--run-dir", d, "--backend", "mock")
    assert code == 2 and "--force" in err
    assert run_cli(capsys, "run", "exp1", "--config", cfg_file, "--run-dir", d, "--backend", "mock", "--force")[0] == 0


def test_seed_flag_changes_run(tmp_path, capsys, cfg_file):
    ids = []
    for seed in (1, 2):
        _, out, _ = run_cli(capsys, "run", "exp1", "--config", cfg_file, "--run-dir", tmp_path / str(seed),
                            "--backend", "mock", "--seed", seed)
        ids.append(json.loads(out)["run_id"])
    assert ids[0] != ids[1]


def test_live_without_key_exits_3(tmp_path, capsys, cfg_file, monkeypatch):
    monkeypatch.delenv("PERSONA_LAB_API_KEY", raising=False)
    code, _, err = run_cli(capsys, "run", "exp1", "--config", cfg_file, "--run-dir", tmp_path / "r", "--backend", "live")
    assert code == 3 and "PERSONA_LAB_API_KEY" in err


def test_config_and_data_exit_codes(tmp_path, capsys, cfg_file):
    bad = tmp_path / "bad.yaml"
    bad.write_text("population_per_group: 0\n")
    assert run_cli(capsys, "run", "exp1", "--config", bad, "--run-dir", tmp_path / "x")[0] == 2
    assert run_cli(capsys, "run", "exp1", "--config", cfg_file, "--run-dir", tmp_path / "y", "--backend", "replay")[0] == 2
    d = tmp_path / "r"
    run_cli(capsys, "run", "exp1", "--config", cfg_file, "--run-dir", d, "--backend", "mock")
    assert run_cli(capsys, "analyze", "--run-dir", d)[0] == 2
    assert run_cli(capsys, "analyze", "--run-dir", d, "--dic", "demo", "--after-phase", "AfterInteractiveWriting")[0] == 4
    (d / "agents.csv").write_text("tampered\n")
    assert run_cli(capsys, "analyze", "--run-dir", d, "--dic", "demo")[0] == 4


def test_record_then_replay_verify(tmp_path, capsys, cfg_file):
    d = tmp_path / "rec"
    code, _, _ = run_cli(capsys, "run", "exp2", "--config", cfg_file, "--run-dir", d,
                         "--backend", "record", "--record-source", "mock")
    assert code == 0 and (d / "replay_store.jsonl").exists()
    code, out, _ = run_cli(capsys, "replay-verify", "--run-dir", d)
    summary = json.loads(out)
    assert code == 0 and summary["identical"] and summary["differing"] == []
    lines = (d / "replay_store.jsonl").read_text().splitlines()
    assert summary["replayed_calls"] == len(lines)
    code, _, _ = run_cli(capsys, "run", "exp2", "--config", cfg_file, "--run-dir", tmp_path / "rep",
                         "--backend", "replay", "--replay-store", d / "replay_store.jsonl")
    assert code == 0
    for name in CORE_FILES + ("manifest.json",):
        assert (tmp_path / "rep" / name).read_bytes() == (d / name).read_bytes()


def test_replay_verify_detects_drift(tmp_path, capsys, cfg_file):
    d = tmp_path / "rec"
    run_cli(capsys, "run", "exp1", "--config", cfg_file, "--run-dir", d, "--backend", "record", "--record-source", "mock")
    store = d / "replay_store.jsonl"
    recs = [json.loads(ln) for ln in store.read_text().splitlines()]
    # answers to the last questionnaire feed no later request, so replay still resolves
    for r in recs:
        if len(r["request"]["messages"]) == 4:
            r["text"] = r["text"].replace(") 1", ") 2")
    store.write_text("".join(json.dumps(r) + "\n" for r in recs))
    code, out, _ = run_cli(capsys, "replay-verify", "--run-dir", d)
    assert code == 4 and "bfi_scores.csv" in json.loads(out)["differing"]


def test_replay_of_edited_story_misses(tmp_path, capsys, cfg_file):
    d = tmp_path / "rec"
    run_cli(capsys, "run", "exp1", "--config", cfg_file, "--run-dir", d, "--backend", "record", "--record-source", "mock")
    store = d / "replay_store.jsonl"
    recs = [json.loads(ln) for ln in store.read_text().splitlines()]
    for r in recs:
        if r["text"].count(" ") > 400:
            r["text"] = r["text"] + " extra"
    store.write_text("".join(json.dumps(r) + "\n" for r in recs))
    code, _, err = run_cli(capsys, "replay-verify", "--run-dir", d)
    assert code == 3 and "ScriptMiss" in err
