"""Loading persona cards, strategy cards, demonstrations and prompt templates."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping

import yaml

from ..core import Role

PLACEHOLDER_RE = re.compile(r"\[([A-Z]+)\]")

PLACEHOLDERS = frozenset(
    {
        "AGENT",
        "ROLE",
        "DAY",
        "TURN",
        "ALIVE",
        "EVENTS",
        "HISTORY",
        "CANDIDATE",
        "SUMMARY",
        "STRATEGY",
        "STRATEGIES",
        "TARGET",
        "ANSWER",
    }
)


class AssetError(ValueError):
    pass


@dataclass(frozen=True)
class PersonaCard:
    id: str
    roles: tuple[Role, ...]
    profile: tuple[str, ...]
    examples: tuple[str, ...]

    def __post_init__(self) -> None:
        for name in ("profile", "examples"):
            n = len(getattr(self, name))
            if not 3 <= n <= 5:
                raise AssetError(f"persona {self.id!r}: {name} needs 3-5 items, has {n}")

    def render(self) -> str:
        lines = ["Character profile:"]
        lines += [f"- {p}" for p in self.profile]
        lines.append("Example utterances in this character's voice:")
        lines += [f"- {e}" for e in self.examples]
        return "\n".join(lines)


@dataclass(frozen=True)
class StrategyCard:
    id: str
    applicable_day: str  # "0", "1", "2" or "any"
    guideline: str
    selection_mode: str = "fixed_sequence"

    def applies_to(self, day: int) -> bool:
        return self.applicable_day == "any" or self.applicable_day == str(day)

    def fill(self, **values: str) -> StrategyCard:
        return StrategyCard(self.id, self.applicable_day, fill(self.guideline, **values), self.selection_mode)


def fill(template: str, **values: object) -> str:
    """Replace ``[NAME]`` placeholders; names not given are left untouched."""

    def sub(m: re.Match) -> str:
        key = m.group(1)
        return str(values[key]) if key in values else m.group(0)

    return PLACEHOLDER_RE.sub(sub, template)


def _card(raw: Mapping) -> StrategyCard:
    return StrategyCard(
        id=raw["id"],
        applicable_day=str(raw.get("day", "any")),
        guideline=" ".join(raw["guideline"].split()),
        selection_mode=raw.get("selection", "fixed_sequence"),
    )


@dataclass(frozen=True)
class Assets:
    personas: tuple[PersonaCard, ...]
    cards: Mapping[str, tuple[StrategyCard, ...]]
    seer_guidelines: str
    demos: Mapping[str, tuple[Mapping[str, str], ...]]
    templates: Mapping[str, str]

    def persona_for(self, role: Role, persona_id: str | None = None) -> PersonaCard:
        if persona_id is not None:
            for p in self.personas:
                if p.id == persona_id:
                    if role not in p.roles:
                        raise AssetError(f"persona {persona_id!r} is not bound to {role.value}")
                    return p
            raise AssetError(f"unknown persona {persona_id!r}")
        for p in self.personas:
            if role in p.roles:
                return p
        raise AssetError(f"no persona bound to {role.value}")

    def card(self, group: str, card_id: str) -> StrategyCard:
        for c in self.cards[group]:
            if c.id == card_id:
                return c
        raise AssetError(f"no card {card_id!r} in {group!r}")

    def cards_for_day(self, group: str, day: int) -> list[StrategyCard]:
        return [c for c in self.cards[group] if c.applies_to(day)]


def _read_yaml(root, name: str):
    return yaml.safe_load((root / name).read_text(encoding="utf-8"))


def load_assets(path: str | Path | None = None) -> Assets:
    """Load assets from ``path`` (a directory) or from the packaged defaults."""
    root = Path(path) if path is not None else resources.files("wolfdial") / "assets"
    personas = tuple(
        PersonaCard(
            id=p["id"],
            roles=tuple(Role(r) for r in p["roles"]),
            profile=tuple(p["profile"]),
            examples=tuple(p["examples"]),
        )
        for p in _read_yaml(root, "personas.yaml")["personas"]
    )
    raw = _read_yaml(root, "strategies.yaml")
    seer = raw.pop("seer")
    cards = {group: tuple(_card(c) for c in items) for group, items in raw.items()}
    cards["seer"] = tuple(_card(c) for c in seer["cards"])
    demos = {k: tuple(v) for k, v in _read_yaml(root, "demos.yaml").items()}
    templates = {}
    for entry in (root / "templates").iterdir():
        if entry.name.endswith(".txt"):
            text = entry.read_text(encoding="utf-8").rstrip("\n")
            unknown = set(PLACEHOLDER_RE.findall(text)) - PLACEHOLDERS
            if unknown:
                raise AssetError(f"{entry.name}: unknown placeholders {sorted(unknown)}")
            templates[entry.name[:-4]] = text
    assets = Assets(personas, cards, " ".join(seer["guidelines"].split()), demos, templates)
    _check(assets)
    return assets


def _check(assets: Assets) -> None:
    if len(assets.cards["seer"]) != 5:
        raise AssetError("the seer needs exactly five strategy cards")
    wolf = assets.cards["werewolf"]
    day1 = {c.id for c in wolf if c.applicable_day == "1"}
    day2 = {c.id for c in wolf if c.applicable_day == "2"}
    if not day1 or not day2 or len(day1) + len(day2) != len(wolf):
        raise AssetError("werewolf cards must split into separate Day 1 and Day 2 sets")
    for role in Role:
        assets.persona_for(role)


@lru_cache(maxsize=None)
def default_assets() -> Assets:
    return load_assets()
