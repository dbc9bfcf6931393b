"""``persona-lab`` command line.

Exit codes: 0 success, 2 configuration/usage, 3 backend, 4 data quality.
Diagnostics go to stderr; stdout carries one JSON summary line.
"""
from __future__ import annotations

import argparse
import filecmp
import json
import logging
import sys
import tempfile
from pathlib import Path

from .backend import LiveBackend, RecordingBackend, ReplayBackend
from .bfi import Phase
from .errors import (
    AlreadyExists,
    BackendError,
    ConfigError,
    DataQualityError,
    LiwcError,
    PersonaLabError,
    RunError,
    SchemaMismatch,
)
from .experiment import (
    CORE_FILES,
    DEFAULT_CONFIG_TEXT,
    ExperimentConfig,
    bootstrap_population,
    config_of,
    load_config,
    load_run,
    profiles_of,
    resolve_profiles,
    run_interactive,
    run_noninteractive,
    save_run,
)
from .report import analyze_run, compare_csv
from .simulate import synthetic_backend

log = logging.getLogger("persona_lab")

EXIT_OK, EXIT_CONFIG, EXIT_BACKEND, EXIT_DATA = 0, 2, 3, 4
CONFIG_NAME = "config.yaml"
STORE_NAME = "replay_store.jsonl"


def _emit(summary: dict) -> None:
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")


def cmd_init(args) -> int:
    d = Path(args.dir)
    d.mkdir(parents=True, exist_ok=True)
    path = d / CONFIG_NAME
    if path.exists() and not args.force:
        raise AlreadyExists(f"{path} exists; pass --force to overwrite")
    path.write_text(DEFAULT_CONFIG_TEXT, encoding="utf-8")
    _emit({"config": str(path)})
    return EXIT_OK


def _make_backend(mode: str, config: ExperimentConfig, run_dir: Path, store: Path | None,
                  record_source: str, profiles):
    if mode == "mock":
        return synthetic_backend(config.mock, profiles)
    if mode == "replay":
        store = store or run_dir / STORE_NAME
        if not store.exists():
            raise ConfigError(f"replay store {store} not found")
        return ReplayBackend(store)

    def live():
        return LiveBackend(base_url=config.base_url, timeout=config.timeout_s,
                           max_retries=config.max_retries, requests_per_minute=config.requests_per_minute)

    if mode == "live":
        return live()
    inner = synthetic_backend(config.mock, profiles) if record_source == "mock" else live()
    store = store or run_dir / STORE_NAME
    if store.exists():
        store.unlink()
    return RecordingBackend(inner, store)


def _execute(kind, config, backend, profiles):
    population = bootstrap_population(config, backend, profiles)
    runner = run_noninteractive if kind == "exp1" else run_interactive
    return runner(population, config, backend, profiles)


def cmd_run(args) -> int:
    config = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        config.rng_seed = args.seed
    mode = args.backend or config.backend_mode
    config.backend_mode = mode
    config.validate()
    run_dir = Path(args.run_dir)
    if (run_dir / "manifest.json").exists() and not args.force:
        raise AlreadyExists(f"{run_dir} already holds a run; pass --force to overwrite")
    profiles = resolve_profiles(config)
    store = Path(args.replay_store) if args.replay_store else None
    backend = _make_backend(mode, config, run_dir, store, args.record_source, profiles)
    try:
        try:
            art = _execute(args.experiment, config, backend, profiles)
        except DataQualityError as exc:
            partial = getattr(exc, "artifact", None)
            if partial is not None:
                save_run(partial, run_dir)
            raise
    finally:
        backend.close()
    save_run(art, run_dir)
    _emit({
        "run_id": art.run_id, "run_dir": str(run_dir), "agents": len(art.agents),
        "stories_accepted": sum(s.accepted for s in art.stories), "failures": len(art.failures),
    })
    return EXIT_OK


def cmd_analyze(args) -> int:
    run_dir = Path(args.run_dir)
    dic = args.dic
    if dic is None:
        config_path = Path(args.config) if args.config else None
        if config_path is not None:
            dic = load_config(config_path).dictionary_path
    if dic is None:
        raise ConfigError("no LIWC dictionary: pass --dic PATH (or --dic demo)")
    if dic != "demo" and not Path(dic).exists():
        raise ConfigError(f"dictionary {dic} not found")
    phase = Phase(args.after_phase) if args.after_phase else None
    written = analyze_run(run_dir, dic, after_phase=phase, seed=args.seed or 0)
    _emit({"run_dir": str(run_dir), "outputs": sorted(written)})
    return EXIT_OK


def cmd_compare(args) -> int:
    text = compare_csv(args.run_a, args.run_b, args.phase_a, args.phase_b)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
        _emit({"out": args.out})
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_replay_verify(args) -> int:
    """Re-run a recorded run from its replay store and diff the artifact files."""
    run_dir = Path(args.run_dir)
    original = load_run(run_dir)
    config = config_of(original, backend_mode="replay")
    profiles = profiles_of(original)
    store = Path(args.replay_store) if args.replay_store else run_dir / STORE_NAME
    if not store.exists():
        raise ConfigError(f"replay store {store} not found")
    backend = ReplayBackend(store)
    art = _execute(original.kind, config, backend, profiles)
    with tempfile.TemporaryDirectory() as tmp:
        save_run(art, tmp)
        names = list(CORE_FILES) + ["manifest.json"]
        _, mismatch, errors = filecmp.cmpfiles(run_dir, tmp, names, shallow=False)
    ok = not mismatch and not errors
    _emit({"run_id": original.run_id, "identical": ok, "differing": sorted(mismatch + errors),
           "replayed_calls": backend.hits})
    return EXIT_OK if ok else EXIT_DATA


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="persona-lab", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("init", help="write a commented default config")
    s.add_argument("dir", nargs="?", default=".")
    s.add_argument("--force", action="store_true")
    s.set_defaults(func=cmd_init)

    s = sub.add_parser("run", help="run an experiment")
    s.add_argument("experiment", choices=("exp1", "exp2"))
    s.add_argument("--config")
    s.add_argument("--run-dir", required=True)
    s.add_argument("--backend", choices=("live", "record", "replay", "mock"))
    s.add_argument("--seed", type=int)
    s.add_argument("--force", action="store_true")
    s.add_argument("--replay-store", help=f"store path (default: RUN_DIR/{STORE_NAME})")
    s.add_argument("--record-source", choices=("live", "mock"), default="live",
                   help="backend wrapped by --backend record")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("analyze", help="statistics, tables and figures for a saved run")
    s.add_argument("--run-dir", required=True)
    s.add_argument("--dic", help='LIWC 2007 .dic path, or "demo"')
    s.add_argument("--config")
    s.add_argument("--after-phase", choices=[p.value for p in Phase if p is not Phase.BEFORE_WRITING])
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("compare", help="post-writing BFI of two runs (control vs experimental)")
    s.add_argument("run_a")
    s.add_argument("run_b")
    s.add_argument("--phase-a", default=Phase.AFTER_NONINTERACTIVE.value, choices=[p.value for p in Phase])
    s.add_argument("--phase-b", default=Phase.AFTER_INTERACTIVE.value, choices=[p.value for p in Phase])
    s.add_argument("--out")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("replay-verify", help="replay a recorded run and check byte identity")
    s.add_argument("--run-dir", required=True)
    s.add_argument("--replay-store")
    s.set_defaults(func=cmd_replay_verify)
    return p


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, BackendError):
        return EXIT_BACKEND
    if isinstance(exc, (DataQualityError, LiwcError)) or (
        isinstance(exc, RunError) and not isinstance(exc, SchemaMismatch)
    ):
        return EXIT_DATA
    return EXIT_CONFIG


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except PersonaLabError as exc:
        print(f"persona-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    raise SystemExit(main())
