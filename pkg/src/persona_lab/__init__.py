"""Persona-conditioned language agents: questionnaires, writing tasks, LIWC analysis, statistics."""

__version__ = "0.1.0"

from .backend import (  # noqa: E402
    ChatMessage,
    GenerationRequest,
    GenerationResult,
    LiveBackend,
    RecordingBackend,
    ReplayBackend,
    Role,
    ScriptedMockBackend,
    record_session,
    replay_session,
)
from .bfi import ITEMS, Phase, TraitScores, administer_bfi, build_bfi_prompt, parse_answer_sheet, score  # noqa: E402
from .experiment import (  # noqa: E402
    ExperimentConfig,
    RunArtifact,
    StoryPhase,
    StoryRecord,
    bootstrap_population,
    load_run,
    run_interactive,
    run_noninteractive,
    save_run,
)
from .liwc import LiwcDictionary, analyze, parse_dic, tokenize, vectorize_corpus  # noqa: E402
from .persona import AgentSpec, PersonaProfile, Polarity, TraitName, builtin_profiles, expected_polarity  # noqa: E402
