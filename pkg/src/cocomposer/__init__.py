"""CoComposer: a five-agent symbolic-music composition engine over ABC notation."""

from .llm import (
    Backend,
    BackendError,
    ChatMessage,
    HttpBackend,
    ModelConfig,
    ScriptedBackend,
)
from .midi import (
    MidiEvent,
    RenderConfig,
    RenderError,
    SynthError,
    expand_repeats,
    render_events,
    render_midi,
    render_wav,
)
from .notation import (
    ParseError,
    RepairError,
    StructureError,
    Tune,
    extract_abc_blocks,
    parse_abc,
    repair,
    serialize_abc,
    validate,
)
from .orchestrator import (
    CompositionBrief,
    DialoguePool,
    MalformedOutput,
    NoScoreExtractable,
    ReviewReport,
    SessionConfig,
    SessionResult,
    run_session,
)
from .roles import AgentRole

__version__ = "0.1.0"

__all__ = [
    "AgentRole",
    "Backend",
    "BackendError",
    "ChatMessage",
    "CompositionBrief",
    "DialoguePool",
    "HttpBackend",
    "MalformedOutput",
    "MidiEvent",
    "ModelConfig",
    "NoScoreExtractable",
    "ParseError",
    "RenderConfig",
    "RenderError",
    "RepairError",
    "ReviewReport",
    "ScriptedBackend",
    "SessionConfig",
    "SessionResult",
    "StructureError",
    "SynthError",
    "Tune",
    "expand_repeats",
    "extract_abc_blocks",
    "parse_abc",
    "render_events",
    "render_midi",
    "render_wav",
    "repair",
    "run_session",
    "serialize_abc",
    "validate",
    "__version__",
]
