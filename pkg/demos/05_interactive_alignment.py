"""Experiment 2: cross-group pairs read each other's stories before writing.

With alignment switched on in the mock, the second writer borrows content
words from its partner, so the two groups become harder to separate than in
experiment 1. The comparison table sets post-writing scores of both runs side
by side.

Run: python demos/05_interactive_alignment.py
"""
import tempfile
from pathlib import Path

from persona_lab import ExperimentConfig, bootstrap_population, run_interactive, run_noninteractive, save_run
from persona_lab.report import analyze_run, compare_csv
from persona_lab.simulate import synthetic_backend

base = Path(tempfile.mkdtemp())
config = ExperimentConfig(population_per_group=40, rng_seed=0)
population = bootstrap_population(config)

save_run(run_noninteractive(population, config, synthetic_backend()), base / "exp1")
exp2 = run_interactive(population, config, synthetic_backend())
save_run(exp2, base / "exp2")
print(f"{len(exp2.pairs)} pairs, each writing in both orders")

for name in ("exp1", "exp2"):
    acc = analyze_run(base / name, "demo")["stats/cv_accuracy.txt"].splitlines()[0]
    print(f"{name}: classifier accuracy {acc}")

print("\npost-writing questionnaire, individual (control) vs interactive (experimental):")
print(compare_csv(base / "exp1", base / "exp2"))
