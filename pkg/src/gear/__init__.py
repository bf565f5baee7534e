"""Query-tool grounding engine.

Given a natural-language query and a library of tools (description +
usage demonstrations each), scores every tool with a weighted blend of a
semantic similarity score and a pattern similarity score, selects the
argmax, and executes the winner through a generated API call. All
language-model interaction sits behind pluggable backends so the whole
pipeline runs offline under scripted stubs.
"""

from .backends import (
    BackendStats,
    BagOfWordsEmbedder,
    GenerationRequest,
    HttpBackend,
    HttpEmbedder,
    ScriptedBackend,
    ScriptedRule,
    TransportError,
)
from .engine import (
    ApiCall,
    GroundingResult,
    ToolGrounding,
    build_api_prompt,
    execute_grounded,
    ground,
    parse_api_call,
    preliminary_answer,
)
from .patterns import (
    PatternProfile,
    PatternSet,
    PatternSpec,
    PriorDistribution,
    encode,
    load_pattern_config,
    validate_priors,
)
from .scoring import (
    ScoreConfig,
    ToolScore,
    combined_score,
    pattern_score,
    pattern_score_upper_bound,
    semantic_score,
)
from .tools import (
    ToolRegistry,
    ToolResponse,
    ToolSpec,
    convert_timezone,
    load_library,
    split_args,
)

__version__ = "0.1.0"
