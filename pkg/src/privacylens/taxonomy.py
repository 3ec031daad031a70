"""Privacy class hierarchy: categories, attributes, and value labels.

The hierarchy is loaded from a JSON data file (a default ships with the
package) so the label inventory can be amended without code changes. All
lookups are against immutable structures; enumeration order is the file
order, which makes every derived coordinate system stable across runs.
"""

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import NamedTuple

from .errors import TaxonomyError

__all__ = [
    "ValueLabel",
    "Attribute",
    "Category",
    "PairCoord",
    "Taxonomy",
    "load_taxonomy",
    "load_default_taxonomy",
]


@dataclass(frozen=True)
class ValueLabel:
    id: str
    display_name: str


@dataclass(frozen=True)
class Attribute:
    id: str
    display_name: str
    values: tuple  # tuple[ValueLabel, ...]
    mandatory: bool = True

    def value_ids(self):
        return [v.id for v in self.values]


@dataclass(frozen=True)
class Category:
    id: str
    display_name: str
    attributes: tuple  # tuple[str, ...] attribute ids
    in_segment_classifier: bool = True
    in_query_classifier: bool = True


class PairCoord(NamedTuple):
    """One coordinate of the category-weighted value vector.

    A value reachable from two categories yields two coordinates, one per
    category; the attribute id disambiguates values that share an id across
    attributes (e.g. ``unspecified``).
    """

    category: str
    attribute: str
    value: str


@dataclass(frozen=True)
class Taxonomy:
    categories: tuple  # tuple[Category, ...]
    attributes: tuple  # tuple[Attribute, ...]
    _category_index: dict = field(repr=False, default_factory=dict)
    _attribute_index: dict = field(repr=False, default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "_category_index", {c.id: c for c in self.categories})
        object.__setattr__(self, "_attribute_index", {a.id: a for a in self.attributes})

    # -- lookups ------------------------------------------------------------

    def category(self, category_id):
        try:
            return self._category_index[category_id]
        except KeyError:
            raise TaxonomyError(f"unknown category: {category_id!r}") from None

    def attribute(self, attribute_id):
        try:
            return self._attribute_index[attribute_id]
        except KeyError:
            raise TaxonomyError(f"unknown attribute: {attribute_id!r}") from None

    def has_category(self, category_id):
        return category_id in self._category_index

    def has_attribute(self, attribute_id):
        return attribute_id in self._attribute_index

    def has_value(self, attribute_id, value_id):
        return self.has_attribute(attribute_id) and value_id in set(
            self.attribute(attribute_id).value_ids()
        )

    def category_ids(self, classifier=None):
        """Category ids, optionally filtered to one classifier's label set.

        ``classifier`` is ``None`` (all), ``"segment"`` or ``"query"``.
        """
        if classifier is None:
            return [c.id for c in self.categories]
        if classifier == "segment":
            return [c.id for c in self.categories if c.in_segment_classifier]
        if classifier == "query":
            return [c.id for c in self.categories if c.in_query_classifier]
        raise ValueError(f"unknown classifier selector: {classifier!r}")

    def attribute_ids(self):
        return [a.id for a in self.attributes]

    def categories_owning(self, attribute_id):
        """Ids of categories from which the attribute descends."""
        return [c.id for c in self.categories if attribute_id in c.attributes]

    def descendants(self, category_id):
        """A(c) with V(b) for each attribute b, in stable enumeration order."""
        cat = self.category(category_id)
        return [(self.attribute(aid), list(self.attribute(aid).values)) for aid in cat.attributes]

    def pair_index(self):
        """Deterministic enumeration of every (category, attribute, value) coordinate.

        Ordered by category file order, then the category's attribute order,
        then the attribute's value order.
        """
        coords = []
        for cat in self.categories:
            for aid in cat.attributes:
                for val in self.attribute(aid).values:
                    coords.append(PairCoord(cat.id, aid, val.id))
        return coords

    # -- serialization ------------------------------------------------------

    def to_dict(self):
        return {
            "categories": [
                {
                    "id": c.id,
                    "name": c.display_name,
                    "attributes": list(c.attributes),
                    "in_segment_classifier": c.in_segment_classifier,
                    "in_query_classifier": c.in_query_classifier,
                }
                for c in self.categories
            ],
            "attributes": [
                {
                    "id": a.id,
                    "name": a.display_name,
                    "mandatory": a.mandatory,
                    "values": [{"id": v.id, "name": v.display_name} for v in a.values],
                }
                for a in self.attributes
            ],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def _require(condition, message):
    if not condition:
        raise TaxonomyError(message)


def _build_taxonomy(doc):
    _require(isinstance(doc, dict), "top level must be an object")
    for key in ("categories", "attributes"):
        _require(key in doc, f"missing top-level key {key!r}")
        _require(isinstance(doc[key], list), f"{key!r} must be a list")

    attributes = []
    seen_attrs = set()
    for i, raw in enumerate(doc["attributes"]):
        aid = raw.get("id")
        _require(isinstance(aid, str) and aid, f"attributes[{i}]: missing id")
        _require(aid not in seen_attrs, f"duplicate attribute id {aid!r}")
        seen_attrs.add(aid)
        raw_values = raw.get("values", [])
        _require(len(raw_values) > 0, f"attribute {aid!r} has no values")
        values = []
        seen_values = set()
        for rv in raw_values:
            vid = rv.get("id") if isinstance(rv, dict) else rv
            _require(isinstance(vid, str) and vid, f"attribute {aid!r}: bad value entry {rv!r}")
            _require(vid not in seen_values, f"attribute {aid!r}: duplicate value id {vid!r}")
            seen_values.add(vid)
            vname = rv.get("name", vid) if isinstance(rv, dict) else vid
            values.append(ValueLabel(id=vid, display_name=vname))
        attributes.append(
            Attribute(
                id=aid,
                display_name=raw.get("name", aid),
                values=tuple(values),
                mandatory=bool(raw.get("mandatory", True)),
            )
        )

    categories = []
    seen_cats = set()
    for i, raw in enumerate(doc["categories"]):
        cid = raw.get("id")
        _require(isinstance(cid, str) and cid, f"categories[{i}]: missing id")
        _require(cid not in seen_cats, f"duplicate category id {cid!r}")
        seen_cats.add(cid)
        attr_ids = raw.get("attributes", [])
        for aid in attr_ids:
            _require(aid in seen_attrs, f"category {cid!r} lists undeclared attribute {aid!r}")
        _require(len(set(attr_ids)) == len(attr_ids), f"category {cid!r} repeats an attribute")
        in_query = bool(raw.get("in_query_classifier", True))
        # "Other"-type categories (intro/generic, non-covered, contact info) are
        # the only ones allowed to carry no attributes; they never serve queries.
        _require(
            attr_ids or not in_query,
            f"category {cid!r} is query-classifiable but lists no attributes",
        )
        categories.append(
            Category(
                id=cid,
                display_name=raw.get("name", cid),
                attributes=tuple(attr_ids),
                in_segment_classifier=bool(raw.get("in_segment_classifier", True)),
                in_query_classifier=in_query,
            )
        )

    reachable = {aid for c in categories for aid in c.attributes}
    orphans = seen_attrs - reachable
    _require(not orphans, f"attributes unreachable from any category: {sorted(orphans)}")

    return Taxonomy(categories=tuple(categories), attributes=tuple(attributes))


def load_taxonomy(source):
    """Load a Taxonomy from a JSON string, file path, or open file object.

    Raises TaxonomyError on malformed input or violated invariants, naming
    the offending id where possible.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = str(source)
        if not text.lstrip().startswith("{"):
            with open(text, "r", encoding="utf-8") as fh:
                text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TaxonomyError(f"taxonomy parse error at line {exc.lineno}: {exc.msg}") from exc
    return _build_taxonomy(doc)


def load_default_taxonomy():
    """The packaged default hierarchy (12 categories, 20 attributes)."""
    text = resources.files("privacylens.data").joinpath("default_taxonomy.json").read_text()
    return load_taxonomy(text)
