"""Block tree: the intermediate document structure between HTML and segments."""

import re
from dataclasses import dataclass, field

_WS = re.compile(r"\s+")


def normalize_ws(text):
    return _WS.sub(" ", text).strip()


@dataclass
class Block:
    """A node of the cleaned document tree.

    kind is one of ``root``, ``div``, ``p``, ``list``, ``item``. Only ``p``
    carries its own text; structural nodes hold children.
    """

    kind: str
    text: str = ""
    children: list = field(default_factory=list)
    origin: str = "paragraph"

    def is_block_leaf(self):
        return self.kind == "p" or (self.kind == "div" and not self.children)

    def iter_text(self):
        if self.text:
            yield self.text
        for child in self.children:
            yield from child.iter_text()

    def full_text(self):
        return normalize_ws(" ".join(self.iter_text()))

    def word_count(self):
        return len(self.full_text().split())
