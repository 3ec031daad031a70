"""Boilerplate-stripping HTML reader producing a Block tree.

Scripts, styles, navigation/header/footer chrome, comments, and form
controls are dropped wholesale; block structure (div, p, lists, headings)
is preserved; inline markup dissolves into its parent's text. Parsing is
best-effort on malformed markup: unknown or unclosed tags degrade to text
flow rather than failing.
"""

from html.parser import HTMLParser

from .blocks import Block, normalize_ws

# removed subtrees: no text under these survives
_DROP_TAGS = {
    "script",
    "style",
    "nav",
    "header",
    "footer",
    "noscript",
    "head",
    "iframe",
    "svg",
    "canvas",
    "form",
    "button",
    "select",
    "option",
    "aside",
    "template",
}

_DIV_TAGS = {"div", "section", "article", "main", "body", "html", "table", "tr", "blockquote"}
_P_TAGS = {"p", "h1", "h2", "h3", "h4", "h5", "h6", "td", "th", "pre"}
_LIST_TAGS = {"ul", "ol"}
_BREAK_TAGS = {"br", "hr"}


class _TreeBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.root = Block(kind="root")
        self.stack = [self.root]
        self.drop_depth = 0
        self.buffer = []

    # -- text buffering -----------------------------------------------------

    def _flush(self):
        text = normalize_ws("".join(self.buffer))
        self.buffer = []
        if not text:
            return
        parent = self.stack[-1]
        if parent.kind == "p":
            parent.text = f"{parent.text} {text}".strip() if parent.text else text
        else:
            parent.children.append(Block(kind="p", text=text))

    # -- tag handling ---------------------------------------------------------

    def handle_starttag(self, tag, attrs):
        if self.drop_depth:
            if tag in _DROP_TAGS:
                self.drop_depth += 1
            return
        if tag in _DROP_TAGS:
            self.drop_depth = 1
            return
        if tag in _BREAK_TAGS:
            self.buffer.append(" ")
            return
        if tag in _DIV_TAGS or tag in _LIST_TAGS or tag in _P_TAGS or tag == "li":
            self._flush()
            if tag in _LIST_TAGS:
                kind = "list"
            elif tag == "li":
                kind = "item"
            elif tag in _P_TAGS:
                kind = "p"
            else:
                kind = "div"
            # block elements auto-close an open paragraph (HTML5 behavior),
            # and a new <li> auto-closes the previous one
            while self.stack[-1].kind == "p":
                self.stack.pop()
            if kind == "item" and self.stack[-1].kind == "item":
                self.stack.pop()
            if kind == "item" and self.stack[-1].kind != "list":
                kind = "p"  # stray <li> outside a list degrades to a paragraph
            node = Block(kind=kind)
            self.stack[-1].children.append(node)
            self.stack.append(node)
        # inline tags: text flows through

    def handle_endtag(self, tag):
        if self.drop_depth:
            if tag in _DROP_TAGS:
                self.drop_depth -= 1
            return
        if tag in _BREAK_TAGS:
            return
        kind = (
            "list"
            if tag in _LIST_TAGS
            else "item"
            if tag == "li"
            else "p"
            if tag in _P_TAGS
            else "div"
            if tag in _DIV_TAGS
            else None
        )
        if kind is None:
            return
        self._flush()
        # close the nearest matching open node; ignore stray end tags
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].kind == kind:
                del self.stack[i:]
                break

    def handle_data(self, data):
        if not self.drop_depth:
            self.buffer.append(data)

    def close(self):
        super().close()
        self._flush()
        return self.root


def _prune(block):
    """Drop empty paragraphs and structural nodes with no surviving content."""
    kept = []
    for child in block.children:
        _prune(child)
        if child.kind == "p" and not child.text:
            if not child.children:
                continue
        if child.kind in ("div", "list", "item") and not child.children and not child.text:
            continue
        kept.append(child)
    block.children = kept
    return block


def looks_like_html(text):
    sample = text.lstrip()[:512].lower()
    return sample.startswith("<!doctype") or "<html" in sample or (
        "<" in sample and any(f"<{t}" in sample for t in ("p", "div", "ul", "ol", "body", "h1"))
    )


def extract_text(doc):
    """Clean a PolicyDocument's source into a Block tree.

    Plain-text sources pass through unchanged: each blank-line-separated
    chunk becomes one paragraph. Raises ValueError when nothing readable
    survives extraction.
    """
    source = doc.source if hasattr(doc, "source") else str(doc)
    if looks_like_html(source):
        builder = _TreeBuilder()
        builder.feed(source)
        tree = _prune(builder.close())
    else:
        tree = Block(kind="root")
        for chunk in source.split("\n\n"):
            text = normalize_ws(chunk)
            if text:
                tree.children.append(Block(kind="p", text=text))
    if not tree.full_text():
        raise ValueError("document contains no extractable text")
    return tree
