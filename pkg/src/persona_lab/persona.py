"""Personality profiles, their conditioning prompts and agent identities."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError


class TraitName(str, enum.Enum):
    """The five BFI dimensions, in report-column order."""

    EXTRAVERSION = "Extraversion"
    AGREEABLENESS = "Agreeableness"
    CONSCIENTIOUSNESS = "Conscientiousness"
    NEUROTICISM = "Neuroticism"
    OPENNESS = "Openness"

    @property
    def abbrev(self) -> str:
        return self.value[0]


TRAITS: tuple[TraitName, ...] = tuple(TraitName)


class Polarity(str, enum.Enum):
    HIGH = "High"
    LOW = "Low"

    def flipped(self) -> "Polarity":
        return Polarity.LOW if self is Polarity.HIGH else Polarity.HIGH


@dataclass(frozen=True)
class PersonaProfile:
    id: str
    display_name: str
    system_prompt: str
    expected_polarity: dict = field(hash=False)

    def __post_init__(self):
        if not self.system_prompt:
            raise ConfigError(f"profile {self.id!r}: system_prompt must be non-empty")
        missing = [t.value for t in TRAITS if t not in self.expected_polarity]
        if missing:
            raise ConfigError(f"profile {self.id!r}: no polarity for {', '.join(missing)}")


# group_label coding is fixed so that positive point-biserial
# coefficients point at the creative group.
GROUP_LABELS = {"creative": 1, "analytical": 0}

CREATIVE_PROMPT = (
    "You are a character who is extroverted, agreeable, conscientious, neurotic and open to experience."
)
ANALYTICAL_PROMPT = (
    "You are a character who is introverted, antagonistic, unconscientious, "
    "emotionally stable and closed to experience."
)


def builtin_profiles() -> list[PersonaProfile]:
    """Return the two fixed personas: ``creative`` (all High) and ``analytical`` (all Low)."""
    return [
        PersonaProfile(
            id="creative",
            display_name="Creative",
            system_prompt=CREATIVE_PROMPT,
            expected_polarity={t: Polarity.HIGH for t in TRAITS},
        ),
        PersonaProfile(
            id="analytical",
            display_name="Analytical",
            system_prompt=ANALYTICAL_PROMPT,
            expected_polarity={t: Polarity.LOW for t in TRAITS},
        ),
    ]


def expected_polarity(profile: PersonaProfile, trait: TraitName) -> Polarity:
    return profile.expected_polarity[TraitName(trait)]


def profile_by_id(profiles, profile_id: str) -> PersonaProfile:
    for p in profiles:
        if p.id == profile_id:
            return p
    raise KeyError(profile_id)


def group_label(profile_id: str) -> int:
    try:
        return GROUP_LABELS[profile_id]
    except KeyError:
        raise ConfigError(
            f"profile {profile_id!r} has no group label; expected one of {sorted(GROUP_LABELS)}"
        ) from None


@dataclass(frozen=True)
class AgentSpec:
    agent_id: str
    profile_id: str
    group_label: int
    sampling_temperature: float = 0.7

    def __post_init__(self):
        if not 0.0 <= self.sampling_temperature <= 2.0:
            raise ConfigError(f"temperature {self.sampling_temperature} outside [0, 2]")
        if GROUP_LABELS.get(self.profile_id, self.group_label) != self.group_label:
            raise ConfigError(f"agent {self.agent_id}: group label disagrees with profile {self.profile_id}")


def _parse_polarity(value) -> Polarity:
    text = str(value).strip().lower()
    if text in ("high", "h", "+"):
        return Polarity.HIGH
    if text in ("low", "l", "-"):
        return Polarity.LOW
    raise ConfigError(f"bad polarity {value!r}; use High or Low")


def profile_from_mapping(data: dict) -> PersonaProfile:
    try:
        pid = str(data["id"])
        prompt = data["system_prompt"]
        polarity_block = data["polarity"]
    except KeyError as exc:
        raise ConfigError(f"profile entry lacks {exc.args[0]!r}") from None
    polarity = {}
    for trait in TRAITS:
        key = next((k for k in polarity_block if str(k).lower() == trait.value.lower()), None)
        if key is None:
            raise ConfigError(f"profile {pid!r}: no polarity for {trait.value}")
        polarity[trait] = _parse_polarity(polarity_block[key])
    return PersonaProfile(
        id=pid,
        display_name=str(data.get("display_name", pid)),
        system_prompt=str(prompt),
        expected_polarity=polarity,
    )


def profile_to_mapping(profile: PersonaProfile) -> dict:
    return {
        "id": profile.id,
        "display_name": profile.display_name,
        "system_prompt": profile.system_prompt,
        "polarity": {t.value: profile.expected_polarity[t].value for t in TRAITS},
    }


def load_profiles(path) -> list[PersonaProfile]:
    """Read profiles from a YAML file holding a top-level ``profiles`` list."""
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    entries = data.get("profiles", data if isinstance(data, list) else None)
    if not entries:
        raise ConfigError(f"{path}: no profiles found")
    profiles = [profile_from_mapping(e) for e in entries]
    ids = [p.id for p in profiles]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"{path}: duplicate profile ids")
    return profiles


def dump_profiles(profiles, path) -> None:
    Path(path).write_text(
        yaml.safe_dump({"profiles": [profile_to_mapping(p) for p in profiles]}, sort_keys=False, width=1000),
        encoding="utf-8",
    )
