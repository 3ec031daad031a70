from .blocks import Block, normalize_ws
from .graphseg import (
    SentenceGraph,
    build_sentence_graph,
    fine_segment,
    partition_clique_runs,
    sentence_vector,
)
from .html_extract import extract_text
from .lists import aggregate_lists
from .pipeline import Segment, SegmenterConfig, coarse_segment, segment_policy
from .sentences import split_sentences

__all__ = [
    "Block",
    "normalize_ws",
    "SentenceGraph",
    "build_sentence_graph",
    "fine_segment",
    "partition_clique_runs",
    "sentence_vector",
    "extract_text",
    "aggregate_lists",
    "Segment",
    "SegmenterConfig",
    "coarse_segment",
    "segment_policy",
    "split_sentences",
]
