"""List handling: merge short-item lists, expand long-item lists.

A list whose items all fit in ``short_item_max_words`` words collapses,
together with its introductory statement, into a single paragraph. Any
other list becomes one paragraph per item, each prefixed by the
introductory statement. Nested lists are processed innermost-first, so an
inner merge happens before the outer list is measured.

The introductory statement is the final sentence of the nearest preceding
sibling paragraph; its earlier sentences survive as their own paragraph.
"""

import warnings

from .blocks import Block, normalize_ws
from .sentences import split_sentences

__all__ = ["aggregate_lists"]


def _item_text(item):
    return item.full_text()


def _intro_from_preceding(siblings, list_pos):
    """(intro statement, replacement paragraph or None, intro index or None)."""
    for i in range(list_pos - 1, -1, -1):
        prev = siblings[i]
        if prev.kind == "p" and prev.text:
            sentences = split_sentences(prev.text)
            intro = sentences[-1]
            remainder = normalize_ws(" ".join(sentences[:-1]))
            replacement = Block(kind="p", text=remainder, origin=prev.origin) if remainder else None
            return intro, replacement, i
        if prev.kind != "p":
            break
    return "", None, None


def _rewrite_list(node, siblings, pos, short_item_max_words):
    """Replacement blocks for one list node (which has no nested lists left)."""
    items = []
    for child in node.children:
        text = _item_text(child)
        if text:
            items.append(text)
    if not items:
        return [], None

    intro, replacement, intro_pos = _intro_from_preceding(siblings, pos)
    if intro_pos is None:
        warnings.warn("list has no introductory statement; using an empty prefix")

    produced = []
    if all(len(item.split()) <= short_item_max_words for item in items):
        merged = f"{intro} {'; '.join(items)}".strip()
        produced.append(Block(kind="p", text=merged, origin="merged_list"))
    else:
        for item in items:
            produced.append(
                Block(kind="p", text=f"{intro} {item}".strip(), origin="list_item_expanded")
            )
    if replacement is not None:
        produced.insert(0, replacement)
    return produced, intro_pos


def aggregate_lists(tree, short_item_max_words=20):
    """Rewrite every list in the tree into paragraphs, innermost-first.

    Returns the same tree object; afterwards no ``list`` nodes remain and
    nesting depth never increases.
    """

    def process(block):
        # children first, so inner lists merge before the outer list is seen
        for child in block.children:
            process(child)
        new_children = []
        consumed_intros = set()
        replacements = {}
        for pos, child in enumerate(block.children):
            if child.kind != "list":
                continue
            produced, intro_pos = _rewrite_list(
                child, block.children, pos, short_item_max_words
            )
            replacements[pos] = produced
            if intro_pos is not None:
                consumed_intros.add(intro_pos)
        if not replacements:
            return
        for pos, child in enumerate(block.children):
            if pos in consumed_intros:
                continue
            if pos in replacements:
                new_children.extend(replacements[pos])
            else:
                new_children.append(child)
        block.children = new_children

    process(tree)
    return tree
