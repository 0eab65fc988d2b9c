"""Entity-centric faithfulness metrics and corpus tooling for table-to-text data."""

from .alignment import Alignment, align_instance, exact_match_spans, filtered_subsequence_match
from .corpus import (
    EntityMention,
    Instance,
    Record,
    Span,
    Table,
    Token,
    TokenSpan,
    normalize_for_match,
    parse_instance,
    segment_sentences,
    serialize_instance,
    tokenize,
)
from .errors import (
    DegenerateInstance,
    EmptyCorpus,
    ParseError,
    T2TFaithError,
    UsageError,
    ValidationError,
)
from .metrics import (
    CorpusMetrics,
    InstanceMetrics,
    corpus_metrics,
    hallucination_ratio,
    instance_metrics,
    rank_instances,
)
from .planning import (
    EntityLiteral,
    Plan,
    RecordRef,
    RenderMode,
    augment_plan,
    check_plan_grammar,
    extract_gold_plan,
    parse_plan,
    postedit_plan,
    render_input,
    render_plan,
)
from .transforms import (
    FilterConfig,
    TruncateConfig,
    filter_uncovered_records,
    sample_random_fraction,
    select_top_fraction,
    truncate_reference,
)

__version__ = "0.1.0"
