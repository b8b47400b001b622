"""Contextual vocabulary learning content service.

Generates themed story scripts and per-word sticker images for vocabulary
units, with educator refinement and learner exploration chains, over
pluggable (and deterministically mockable) generative providers.
"""
from .config import ApiConfig, load_config
from .domain import (
    ExplorationChain,
    GenerationJob,
    HighlightSpan,
    JobKind,
    JobState,
    MaterialSet,
    ScriptLine,
    SetState,
    StickerAsset,
    StoryScript,
    Theme,
    VocabularyUnit,
    Word,
    canonical_word_key,
)
from .orchestrator import Orchestrator, RetryPolicy
from .parsing import (
    match_word_occurrences,
    parse_exploration_output,
    parse_script_output,
    validate_script,
)
from .prompts import PromptEngine, PromptText
from .store import Store

__version__ = "0.1.0"

__all__ = [
    "ApiConfig",
    "ExplorationChain",
    "GenerationJob",
    "HighlightSpan",
    "JobKind",
    "JobState",
    "MaterialSet",
    "Orchestrator",
    "PromptEngine",
    "PromptText",
    "RetryPolicy",
    "ScriptLine",
    "SetState",
    "StickerAsset",
    "Store",
    "StoryScript",
    "Theme",
    "VocabularyUnit",
    "Word",
    "canonical_word_key",
    "load_config",
    "match_word_occurrences",
    "parse_exploration_output",
    "parse_script_output",
    "validate_script",
]
