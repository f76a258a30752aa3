"""storyloom: a story-writing engine driven by manipulable visual constructs.

The package extracts a relational story model from narrative text, evaluates
an operator algebra over story elements into renderable views, compiles
manipulations of those views into targeted text edits with word-level
tracked changes, and keeps every state in a branching history tree.
"""

from .constructs import (
    AnnotationElement,
    ConstructExpr,
    ElementKind,
    StoryAnnotations,
    ViewModel,
    builtin_view,
    evaluate,
    group_parallel_edges,
    parse_expr,
    pretty_print,
    view_to_dict,
)
from .edits import (
    AddAction,
    AddEntity,
    AddLocation,
    ChangeAction,
    EditIntent,
    EditOutcome,
    EditScope,
    MoveEntity,
    RemoveAction,
    RemoveEntity,
    ReorderEvents,
    RewriteFromVisuals,
    SetTrait,
    compile_intent,
    execute,
    scope_prompt,
    serialize_event_order,
)
from .extraction import (
    ExtractionCache,
    ExtractionPipeline,
    run_full_extraction,
    run_incremental_extraction,
    validate_payload,
)
from .gateway import (
    GatewayConfig,
    HttpGateway,
    MockGateway,
    RecordingGateway,
    ReplayGateway,
)
from .model import (
    ActionEvent,
    Entity,
    Location,
    SentenceSpan,
    StoryModel,
    Trait,
    events_for_entity,
    events_for_span,
    locations_for_entity,
    model_from_dict,
    model_to_dict,
    sentence_for_event,
    validate_model,
)
from .prompts import (
    PromptSpec,
    build_entities_prompt,
    build_events_prompt,
    build_locations_prompt,
)
from .revision import ChangeSet, HistoryTree, Snapshot, checkout, commit, diff, resolve
from .segmentation import segment_sentences

__version__ = "0.1.0"
