"""The full segmentation pipeline: extract, aggregate lists, split."""

from dataclasses import dataclass

from .graphseg import fine_segment
from .html_extract import extract_text
from .lists import aggregate_lists

__all__ = ["Segment", "SegmenterConfig", "coarse_segment", "segment_policy"]


@dataclass(frozen=True)
class Segment:
    policy_id: str
    index: int
    text: str
    origin: str = "paragraph"  # paragraph | merged_list | list_item_expanded | fine_split

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("segment text must be non-empty")
        if self.index < 0:
            raise ValueError("segment index must be >= 0")


@dataclass
class SegmenterConfig:
    fine_threshold: float = 0.25
    fine_min_sentences: int = 2
    short_item_max_words: int = 20

    @classmethod
    def from_dict(cls, mapping):
        """Accepts the dotted config keys used in config files."""
        return cls(
            fine_threshold=float(mapping.get("fine_segment.threshold", 0.25)),
            fine_min_sentences=int(mapping.get("fine_segment.min_sentences", 2)),
            short_item_max_words=int(mapping.get("list.short_item_max_words", 20)),
        )


def coarse_segment(tree):
    """One raw (text, origin) pair per leaf div/p block, in document order."""
    out = []

    def walk(block):
        if block.kind == "p":
            if block.text:
                out.append((block.text, block.origin))
            for child in block.children:
                walk(child)
            return
        for child in block.children:
            walk(child)

    walk(tree)
    return out


def segment_policy(doc, emb, config=None):
    """Segment a policy document into an ordered list of Segments."""
    config = config or SegmenterConfig()
    tree = extract_text(doc)
    aggregate_lists(tree, short_item_max_words=config.short_item_max_words)
    segments = []
    for raw, origin in coarse_segment(tree):
        pieces = fine_segment(
            raw, emb, threshold=config.fine_threshold, min_len=config.fine_min_sentences
        )
        for piece in pieces:
            segments.append(
                Segment(
                    policy_id=doc.policy_id,
                    index=len(segments),
                    text=piece,
                    origin=origin if len(pieces) == 1 else "fine_split",
                )
            )
    return segments
