"""LLM-driven Werewolf players."""

from .assets import Assets, PersonaCard, StrategyCard, default_assets, load_assets
from .decide import decide_attack, decide_target
from .memory import AgentMemory, DaySummary
from .player import LLMAgent, enforce_declaration
from .policies import possessed_generate, seer_generate, villager_generate, werewolf_generate
from .prompts import SECTION_HEADERS, MissingComponent, PromptBundle, build_prompt
from .summarizer import summarize_day

__all__ = [
    "AgentMemory",
    "Assets",
    "DaySummary",
    "LLMAgent",
    "MissingComponent",
    "PersonaCard",
    "PromptBundle",
    "SECTION_HEADERS",
    "StrategyCard",
    "build_prompt",
    "decide_attack",
    "decide_target",
    "default_assets",
    "enforce_declaration",
    "load_assets",
    "possessed_generate",
    "seer_generate",
    "summarize_day",
    "villager_generate",
    "werewolf_generate",
]
