"""Record every model call of a small run, then replay it offline.

Recording wraps any backend; here the synthetic mock stands in for a live
endpoint. Replaying the store reproduces the run without touching the model.

Run: python demos/03_record_and_replay.py
"""
import tempfile
from pathlib import Path

from persona_lab import ExperimentConfig, bootstrap_population, run_noninteractive
from persona_lab.experiment import serialize_run
from persona_lab.backend import record_session, replay_session
from persona_lab.simulate import synthetic_backend

config = ExperimentConfig(population_per_group=3, rng_seed=1)
population = bootstrap_population(config)

with tempfile.TemporaryDirectory() as tmp:
    store = Path(tmp) / "replay_store.jsonl"
    recorded = run_noninteractive(population, config, record_session(store, synthetic_backend()))
    print(f"recorded {len(store.read_text().splitlines())} calls for run {recorded.run_id}")

    replayer = replay_session(store)
    replayed = run_noninteractive(population, config, replayer)
    same = serialize_run(recorded) == serialize_run(replayed)
    print(f"replayed {replayer.hits} calls; artifacts identical: {same}")
