"""Experiment 1 on the synthetic mock: do the two personas write differently?

Each agent fills in the questionnaire, writes a story, and fills it in again.
The analysis then asks whether a classifier can tell the groups apart from
their LIWC profiles alone.

Run: python demos/04_noninteractive_experiment.py [RUN_DIR]
"""
import sys
import tempfile
from pathlib import Path

from persona_lab import ExperimentConfig, bootstrap_population, run_noninteractive, save_run
from persona_lab.report import analyze_run
from persona_lab.simulate import synthetic_backend

run_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp()) / "exp1"
config = ExperimentConfig(population_per_group=40, rng_seed=0)
art = run_noninteractive(bootstrap_population(config), config, synthetic_backend())
save_run(art, run_dir)
print(f"{art.run_id}: {len(art.agents)} agents, "
      f"{sum(s.accepted for s in art.stories)} accepted stories -> {run_dir}")

out = analyze_run(run_dir, "demo")
print("\nquestionnaire, creative vs analytical (before writing):")
print(out["stats/bfi_anova.csv"])
print("categories most associated with each group (positive = creative):")
print(out["stats/pb_top5.csv"])
print("10-fold CV accuracy:", out["stats/cv_accuracy.txt"].splitlines()[0])
print(f"figures: {run_dir / 'stats' / 'pca_scatter.svg'}, {run_dir / 'stats' / 'bfi_boxplots.svg'}")
