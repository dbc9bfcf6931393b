"""Population bootstrapping, the two writing experiments, and run persistence."""
from __future__ import annotations

import csv
import enum
import hashlib
import io
import itertools
import json
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from . import __version__
from .backend import DEFAULT_MODEL, ChatMessage, GenerationRequest, Role
from .bfi import Phase, TraitScores, administer_bfi
from .errors import ConfigError, CorruptRun, GroupFailure, PersistentlyMalformed, SchemaMismatch
from .persona import (
    TRAITS,
    AgentSpec,
    PersonaProfile,
    builtin_profiles,
    group_label,
    profile_by_id,
    profile_from_mapping,
    profile_to_mapping,
)
from .prompts import WRITING_PROMPT, interactive_prompt

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

CONTEXT_POLICY = (
    "fresh-context-per-task; post-writing BFI keeps the agent's own writing exchange"
)

BACKEND_MODES = ("live", "record", "replay", "mock")


@dataclass
class ExperimentConfig:
    population_per_group: int = 100
    temperature: float = 0.7
    model_id: str = DEFAULT_MODEL
    word_min: int = 500
    word_max: int = 900
    bfi_retries: int = 3
    story_retries: int = 3
    pairing: str = "CrossGroupBothOrders"
    rng_seed: int = 0
    backend_mode: str = "mock"
    # execution settings; not part of the run snapshot
    base_url: str = "https://api.openai.com/v1"
    requests_per_minute: float = 20.0
    timeout_s: float = 60.0
    max_retries: int = 5
    workers: int = 1
    dictionary_path: str | None = None
    profiles_path: str | None = None
    mock: dict = field(default_factory=dict)

    SNAPSHOT_FIELDS = (
        "population_per_group", "temperature", "model_id", "word_min", "word_max",
        "bfi_retries", "story_retries", "pairing", "rng_seed",
    )

    def validate(self) -> "ExperimentConfig":
        if self.population_per_group < 1:
            raise ConfigError("population_per_group must be >= 1")
        if not self.word_min < self.word_max:
            raise ConfigError("word_min must be smaller than word_max")
        if not 0.0 <= self.temperature <= 2.0:
            raise ConfigError("temperature must lie in [0, 2]")
        if self.bfi_retries < 1 or self.story_retries < 1:
            raise ConfigError("retry counts must be >= 1")
        if self.pairing != "CrossGroupBothOrders":
            raise ConfigError(f"unsupported pairing {self.pairing!r}")
        if self.backend_mode not in BACKEND_MODES:
            raise ConfigError(f"backend_mode must be one of {BACKEND_MODES}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self

    def snapshot(self) -> dict:
        return {k: getattr(self, k) for k in self.SNAPSHOT_FIELDS}

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data).validate()
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


DEFAULT_CONFIG_TEXT = """\
# persona-lab experiment configuration
# Agents per persona group (creative / analytical).
population_per_group: 100
# Sampling temperature used for every agent.
temperature: 0.7
model_id: gpt-3.5-turbo-0613
# Stories outside [word_min, word_max] words are resampled, then dropped.
word_min: 500
word_max: 900
# Total attempts per questionnaire / per story.
bfi_retries: 3
story_retries: 3
pairing: CrossGroupBothOrders
rng_seed: 0
# One of: live, record, replay, mock. The CLI --backend flag overrides it.
backend_mode: mock

# Live endpoint (OpenAI-compatible). The key comes from PERSONA_LAB_API_KEY.
base_url: https://api.openai.com/v1
requests_per_minute: 20
timeout_s: 60
max_retries: 5
workers: 1

# LIWC 2007 .dic file used by `analyze` (not bundled); "demo" selects the
# small synthetic dictionary shipped with the package.
dictionary_path: null
# Optional YAML file with custom persona profiles.
profiles_path: null

# Options for the synthetic mock backend (see persona_lab.simulate).
mock: {}
"""


def load_config(path) -> ExperimentConfig:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping")
    return ExperimentConfig.from_dict(data)


# ---------------------------------------------------------------- records


class StoryPhase(str, enum.Enum):
    INDIVIDUAL = "Individual"
    INTERACTIVE_SECOND = "InteractiveSecond"


def word_count(text: str) -> int:
    return len(text.split())


@dataclass
class StoryRecord:
    agent_id: str
    phase: StoryPhase
    text: str
    word_count: int
    accepted: bool
    attempt: int
    partner_agent_id: str | None = None
    sequence: int = 0

    def __post_init__(self):
        self.phase = StoryPhase(self.phase)
        if (self.partner_agent_id is not None) != (self.phase is StoryPhase.INTERACTIVE_SECOND):
            raise ValueError("partner_agent_id is required exactly for InteractiveSecond stories")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["phase"] = self.phase.value
        return d


@dataclass
class BfiRecord:
    agent_id: str
    phase: Phase
    scores: TraitScores
    sequence: int = 0


@dataclass
class RunArtifact:
    run_id: str
    kind: str
    config: dict
    profiles: list
    agents: list
    bfi: list = field(default_factory=list)
    stories: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    pairs: list = field(default_factory=list)
    context_policy: str = CONTEXT_POLICY
    tool_version: str = __version__

    def group_of(self) -> dict:
        return {a.agent_id: a.group_label for a in self.agents}

    def scores(self, phase: Phase) -> list[BfiRecord]:
        return [r for r in self.bfi if r.phase is Phase(phase)]

    def phases(self) -> set:
        return {r.phase for r in self.bfi}

    def accepted_stories(self, phase: StoryPhase) -> list[StoryRecord]:
        return [s for s in self.stories if s.accepted and s.phase is StoryPhase(phase)]

    def analysis_story_phase(self) -> StoryPhase:
        return StoryPhase.INDIVIDUAL if self.kind == "exp1" else StoryPhase.INTERACTIVE_SECOND

    def canonicalize(self) -> "RunArtifact":
        phase_rank = {p: i for i, p in enumerate(Phase)}
        self.agents.sort(key=lambda a: a.agent_id)
        self.bfi.sort(key=lambda r: (r.agent_id, phase_rank[r.phase], r.sequence))
        self.stories.sort(key=lambda s: (s.agent_id, s.sequence))
        self.failures.sort(key=lambda f: (f["agent_id"], f["sequence"], f["stage"]))
        self.pairs.sort()
        return self


# ---------------------------------------------------------------- population


def resolve_profiles(config: ExperimentConfig) -> list[PersonaProfile]:
    if config.profiles_path:
        from .persona import load_profiles

        return load_profiles(config.profiles_path)
    return builtin_profiles()


def bootstrap_population(config: ExperimentConfig, backend=None, profiles=None) -> list[AgentSpec]:
    """``population_per_group`` agents per profile with seed-derived ids.

    Agents are distinct only through sampling; ``backend`` is accepted for
    interface symmetry and is not called.
    """
    config.validate()
    rng = random.Random(config.rng_seed)
    agents = []
    for profile in profiles or builtin_profiles():
        label = group_label(profile.id)
        for i in range(config.population_per_group):
            tag = f"{rng.getrandbits(24):06x}"
            agents.append(AgentSpec(f"{profile.id}-{i:03d}-{tag}", profile.id, label, config.temperature))
    return agents


def pair_agents(population, seed: int) -> list[tuple[str, str]]:
    """Bijection analytical -> creative via a seeded shuffle of the creative side."""
    analytical = sorted(a.agent_id for a in population if a.group_label == 0)
    creative = sorted(a.agent_id for a in population if a.group_label == 1)
    if len(analytical) != len(creative):
        raise ConfigError("cross-group pairing needs equally sized groups")
    random.Random(seed).shuffle(creative)
    return list(zip(analytical, creative))


# ---------------------------------------------------------------- one agent's calls


class _AgentSession:
    """Per-agent call helper holding the agent's persona context and sequence counter."""

    def __init__(self, agent: AgentSpec, profile: PersonaProfile, config, backend, sink):
        self.agent = agent
        self.config = config
        self.backend = backend
        self.system = ChatMessage(Role.SYSTEM, profile.system_prompt)
        self._seq = itertools.count()
        self.sink = sink
        self.failed = False

    def next_seq(self) -> int:
        return next(self._seq)

    def bfi(self, phase: Phase, exchange=()):
        transcript: list = []
        first = None

        def counter():
            nonlocal first
            n = self.next_seq()
            first = n if first is None else first
            return n

        try:
            scores = administer_bfi(
                self.agent, (self.system, *exchange), self.backend, phase,
                retries=self.config.bfi_retries, next_sequence=counter,
                model_id=self.config.model_id, transcript=transcript,
            )
        except PersistentlyMalformed as exc:
            self.fail(f"bfi:{phase.value}", str(exc), exc.raw_texts, first)
            return None
        self.sink["bfi"].append(BfiRecord(self.agent.agent_id, phase, scores, first))
        return scores

    def write(self, prompt: str, phase: StoryPhase, partner: str | None = None):
        """Sample until the word count is in bounds; returns (final record, user message)."""
        user = ChatMessage(Role.USER, prompt)
        record = None
        for attempt in range(1, self.config.story_retries + 1):
            seq = self.next_seq()
            req = GenerationRequest(
                (self.system, user), temperature=self.agent.sampling_temperature,
                model_id=self.config.model_id, agent_id=self.agent.agent_id, sequence=seq,
            )
            text = self.backend.generate(req).text
            n = word_count(text)
            record = StoryRecord(
                self.agent.agent_id, phase, text, n,
                self.config.word_min <= n <= self.config.word_max, attempt, partner, seq,
            )
            self.sink["stories"].append(record)
            if record.accepted:
                break
        if not record.accepted:
            self.fail(f"story:{phase.value}", f"no story within {self.config.word_min}-"
                      f"{self.config.word_max} words after {self.config.story_retries} attempt(s)",
                      [], record.sequence)
        return record, user

    def fail(self, stage, message, raw_texts, sequence):
        self.failed = True
        self.sink["failures"].append({
            "agent_id": self.agent.agent_id, "stage": stage, "message": message,
            "raw_texts": list(raw_texts), "sequence": sequence if sequence is not None else -1,
        })


def _new_sink():
    return {"bfi": [], "stories": [], "failures": []}


def _run_units(units, fn, workers):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, units))
    return [fn(u) for u in units]


def _run_id(kind: str, config: ExperimentConfig, profiles) -> str:
    blob = json.dumps(
        {"kind": kind, "config": config.snapshot(), "profiles": [profile_to_mapping(p) for p in profiles]},
        sort_keys=True,
    )
    return f"{kind}-{hashlib.sha256(blob.encode()).hexdigest()[:12]}"


def _assemble(kind, config, profiles, population, sinks, failed_agents, pairs=()):
    art = RunArtifact(
        run_id=_run_id(kind, config, profiles),
        kind=kind,
        config=config.snapshot(),
        profiles=[profile_to_mapping(p) for p in profiles],
        agents=list(population),
        pairs=[list(p) for p in pairs],
    )
    for sink in sinks:
        art.bfi += sink["bfi"]
        art.stories += sink["stories"]
        art.failures += sink["failures"]
    art.canonicalize()
    for profile in profiles:
        members = [a for a in population if a.profile_id == profile.id]
        bad = sum(1 for a in members if a.agent_id in failed_agents)
        if members and bad * 2 > len(members):
            err = GroupFailure(f"{bad}/{len(members)} {profile.id} agents failed")
            err.artifact = art
            raise err
    return art


def run_noninteractive(population, config: ExperimentConfig, backend, profiles=None) -> RunArtifact:
    """Experiment 1: BFI, individual story, BFI again (with the writing exchange in context)."""
    config.validate()
    profiles = profiles or builtin_profiles()

    def unit(agent):
        sink = _new_sink()
        s = _AgentSession(agent, profile_by_id(profiles, agent.profile_id), config, backend, sink)
        s.bfi(Phase.BEFORE_WRITING)
        story, user = s.write(WRITING_PROMPT, StoryPhase.INDIVIDUAL)
        s.bfi(Phase.AFTER_NONINTERACTIVE, (user, ChatMessage(Role.ASSISTANT, story.text)))
        return sink, agent.agent_id if s.failed else None

    population = sorted(population, key=lambda a: a.agent_id)
    results = _run_units(population, unit, config.workers)
    failed = {aid for _, aid in results if aid}
    return _assemble("exp1", config, profiles, population, [r[0] for r in results], failed)


def run_interactive(population, config: ExperimentConfig, backend, profiles=None) -> RunArtifact:
    """Experiment 2: cross-group pairs, both orders; the second writer sees the first's story."""
    config.validate()
    profiles = profiles or builtin_profiles()
    by_id = {a.agent_id: a for a in population}
    pairs = pair_agents(population, config.rng_seed)

    def unit(pair):
        sink = _new_sink()
        sessions = {
            aid: _AgentSession(by_id[aid], profile_by_id(profiles, by_id[aid].profile_id), config, backend, sink)
            for aid in pair
        }
        for aid in pair:
            sessions[aid].bfi(Phase.BEFORE_WRITING)
        for first_id, second_id in (pair, pair[::-1]):
            first, second = sessions[first_id], sessions[second_id]
            story, _ = first.write(WRITING_PROMPT, StoryPhase.INDIVIDUAL)
            if not story.accepted:
                second.fail(f"story:{StoryPhase.INTERACTIVE_SECOND.value}",
                            f"partner {first_id} produced no accepted story", [], None)
                continue
            reply, user = second.write(interactive_prompt(story.text), StoryPhase.INTERACTIVE_SECOND, first_id)
            second.bfi(Phase.AFTER_INTERACTIVE, (user, ChatMessage(Role.ASSISTANT, reply.text)))
        return sink, {aid for aid, s in sessions.items() if s.failed}

    results = _run_units(pairs, unit, config.workers)
    failed = set().union(*(r[1] for r in results)) if results else set()
    population = sorted(population, key=lambda a: a.agent_id)
    return _assemble("exp2", config, profiles, population, [r[0] for r in results], failed, pairs)


# ---------------------------------------------------------------- persistence

CORE_FILES = ("config.json", "agents.csv", "bfi_scores.csv", "stories.jsonl", "failures.jsonl",
              "pairs.csv", "timeline.csv")


def timeline(art: RunArtifact) -> list[tuple[str, int, str]]:
    """``(agent_id, sequence, event)`` for every recorded BFI and story, in call order per agent."""
    events = [(r.agent_id, r.sequence, f"bfi:{r.phase.value}") for r in art.bfi]
    events += [(s.agent_id, s.sequence, f"story:{s.phase.value}:{s.attempt}") for s in art.stories]
    return sorted(events)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _jsonl(records) -> str:
    return "".join(json.dumps(r, sort_keys=True, ensure_ascii=False) + "\n" for r in records)


def serialize_run(art: RunArtifact) -> dict[str, str]:
    """Every core file of the run, as ``name -> text``."""
    group = art.group_of()
    return {
        "config.json": json.dumps(
            {"config": art.config, "profiles": art.profiles, "context_policy": art.context_policy},
            indent=2, sort_keys=True, ensure_ascii=False,
        ) + "\n",
        "agents.csv": _csv(
            [[a.agent_id, a.profile_id, a.group_label, repr(a.sampling_temperature)] for a in art.agents],
            ["agent_id", "profile_id", "group", "temperature"],
        ),
        "bfi_scores.csv": _csv(
            [[art.run_id, r.agent_id, group[r.agent_id], r.phase.value, *r.scores.as_tuple()] for r in art.bfi],
            ["run_id", "agent_id", "group", "phase"] + [t.abbrev for t in TRAITS],
        ),
        "stories.jsonl": _jsonl(s.to_dict() for s in art.stories),
        "failures.jsonl": _jsonl(art.failures),
        "pairs.csv": _csv(art.pairs, ["analytical_id", "creative_id"]),
        "timeline.csv": _csv(timeline(art), ["agent_id", "sequence", "event"]),
    }


def _sha(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def save_run(art: RunArtifact, directory) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    files = serialize_run(art)
    for name, text in files.items():
        (d / name).write_text(text, encoding="utf-8", newline="\n")
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "run_id": art.run_id,
        "kind": art.kind,
        "tool_version": art.tool_version,
        "files": {name: _sha(text) for name, text in sorted(files.items())},
    }
    (d / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return d


def _read_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def load_run(directory) -> RunArtifact:
    d = Path(directory)
    try:
        manifest = json.loads((d / "manifest.json").read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CorruptRun(f"{d} has no manifest.json") from None
    except json.JSONDecodeError as exc:
        raise CorruptRun(f"unreadable manifest: {exc}") from None
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise SchemaMismatch(f"run schema {manifest.get('schema_version')!r}, this tool reads {SCHEMA_VERSION}")
    texts = {}
    for name, digest in manifest["files"].items():
        try:
            texts[name] = (d / name).read_text(encoding="utf-8")
        except FileNotFoundError:
            raise CorruptRun(f"missing {name}") from None
        if _sha(texts[name]) != digest:
            raise CorruptRun(f"{name} does not match its recorded hash")

    meta = json.loads(texts["config.json"])
    agents = [
        AgentSpec(r["agent_id"], r["profile_id"], int(r["group"]), float(r["temperature"]))
        for r in _read_csv(texts["agents.csv"])
    ]
    bfi_seq = {
        (r["agent_id"], r["event"].split(":", 1)[1]): int(r["sequence"])
        for r in _read_csv(texts["timeline.csv"]) if r["event"].startswith("bfi:")
    }
    bfi = []
    for r in _read_csv(texts["bfi_scores.csv"]):
        phase = Phase(r["phase"])
        scores = TraitScores({t: int(r[t.abbrev]) for t in TRAITS}, phase)
        bfi.append(BfiRecord(r["agent_id"], phase, scores, bfi_seq.get((r["agent_id"], phase.value), 0)))
    stories = [StoryRecord(**json.loads(ln)) for ln in texts["stories.jsonl"].splitlines() if ln]
    failures = [json.loads(ln) for ln in texts["failures.jsonl"].splitlines() if ln]
    pairs = [[r["analytical_id"], r["creative_id"]] for r in _read_csv(texts["pairs.csv"])]
    art = RunArtifact(
        run_id=manifest["run_id"], kind=manifest["kind"], config=meta["config"],
        profiles=meta["profiles"], agents=agents, bfi=bfi, stories=stories,
        failures=failures, pairs=pairs, context_policy=meta["context_policy"],
        tool_version=manifest["tool_version"],
    )
    known = {a.agent_id for a in agents}
    referenced = {r.agent_id for r in bfi} | {s.agent_id for s in stories} | {
        s.partner_agent_id for s in stories if s.partner_agent_id} | {x for p in pairs for x in p}
    if not referenced <= known:
        raise CorruptRun(f"unknown agent ids: {sorted(referenced - known)[:5]}")
    return art


def profiles_of(art: RunArtifact) -> list[PersonaProfile]:
    return [profile_from_mapping(p) for p in art.profiles]


def config_of(art: RunArtifact, **overrides) -> ExperimentConfig:
    return ExperimentConfig(**{**art.config, **overrides}).validate()
