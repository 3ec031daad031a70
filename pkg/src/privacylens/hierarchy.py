"""Two-level classifier ensemble over the taxonomy.

One CNN predicts segment-level categories, one predicts query-level
categories (the query set drops the intro/non-covered/contact labels), and
one CNN per attribute predicts that attribute's values. The does/does-not
attribute model doubles as the statement-polarity classifier. Raw
probabilities are kept on every annotation; threshold gating happens only
in :func:`present_labels`, so the same annotation serves both structured
queries and answer ranking.
"""

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ModelPersistenceError, NotTrainedError
from .metrics import ConfusionCounts, macro_prf, top1_precision
from .neuralnet import CnnTextClassifier, load_classifier, save_classifier

__all__ = [
    "SegmentAnnotation",
    "ClassifierHierarchy",
    "TrainingConfig",
    "train_hierarchy",
    "present_labels",
    "save_hierarchy",
    "load_hierarchy",
]

POLARITY_ATTRIBUTE = "does-does-not"


@dataclass(frozen=True)
class SegmentAnnotation:
    policy_id: str
    segment_index: int
    category_probs: dict  # category_id -> p(c|x), segment-classifier label set
    value_probs: dict  # (attribute_id, value_id) -> p(v|x)
    polarity: tuple = None  # (p(does), p(does-not)) when a polarity model exists

    def dominant_category(self):
        return max(self.category_probs, key=self.category_probs.get)

    def dominant_polarity(self):
        if self.polarity is None:
            return None
        return "does" if self.polarity[0] >= self.polarity[1] else "does-not"


@dataclass
class ClassifierHierarchy:
    taxonomy: object
    segment_category_model: CnnTextClassifier
    query_category_model: CnnTextClassifier
    attribute_models: dict = field(default_factory=dict)
    polarity_model: CnnTextClassifier = None

    def __post_init__(self):
        query_labels = set(self.query_category_model.label_ids)
        non_query = {
            c.id for c in self.taxonomy.categories if not c.in_query_classifier
        }
        if query_labels & non_query:
            raise ValueError("query model must exclude non-query categories")
        for aid, model in self.attribute_models.items():
            expected = set(self.taxonomy.attribute(aid).value_ids())
            if set(model.label_ids) != expected:
                raise ValueError(f"attribute model {aid!r} labels differ from the taxonomy")

    @property
    def embedding_model(self):
        return self.segment_category_model.embedding_model

    def classify_segment(self, segment):
        """Raw category and attribute-value probabilities for one segment."""
        self._check_trained(self.segment_category_model, "segment category model")
        category_probs = self.segment_category_model.predict_proba(segment.text)
        value_probs = {}
        for aid, model in self.attribute_models.items():
            self._check_trained(model, f"attribute model {aid!r}")
            for vid, p in model.predict_proba(segment.text).items():
                value_probs[(aid, vid)] = p
        polarity = None
        if self.polarity_model is not None:
            pol = self.polarity_model.predict_proba(segment.text)
            polarity = (pol["does"], pol["does-not"])
        return SegmentAnnotation(
            policy_id=segment.policy_id,
            segment_index=segment.index,
            category_probs=category_probs,
            value_probs=value_probs,
            polarity=polarity,
        )

    def classify_query(self, question):
        """Probabilities over the query-level category set."""
        if not question or not question.strip():
            raise ValueError("question must be non-empty")
        self._check_trained(self.query_category_model, "query category model")
        return self.query_category_model.predict_proba(question)

    def query_value_probs(self, question):
        """Attribute-value probabilities for a free-form question."""
        value_probs = {}
        for aid, model in self.attribute_models.items():
            for vid, p in model.predict_proba(question).items():
                value_probs[(aid, vid)] = p
        return value_probs

    def classify_polarity(self, segment):
        if self.polarity_model is None:
            raise NotTrainedError("no polarity model in this hierarchy")
        probs = self.polarity_model.predict_proba(segment.text)
        return probs["does"], probs["does-not"]

    @staticmethod
    def _check_trained(model, name):
        if model is None or not model.is_initialized:
            raise NotTrainedError(f"{name} is not trained")


def present_labels(annotation, taxonomy, threshold=0.5):
    """Discrete labels: categories above threshold, plus gated values.

    A value is present only when it clears the threshold and its attribute
    descends from at least one present category; everything else is
    irrelevant given the dominant categories.
    """
    categories = {c for c, p in annotation.category_probs.items() if p > threshold}
    present_attrs = set()
    for cid in categories:
        if taxonomy.has_category(cid):
            present_attrs.update(taxonomy.category(cid).attributes)
    values = {
        (aid, vid)
        for (aid, vid), p in annotation.value_probs.items()
        if p > threshold and aid in present_attrs
    }
    return categories, values


@dataclass
class TrainingConfig:
    epochs: int = 10
    batch_size: int = 40
    learning_rate: float = 1e-3
    seed: int = 0
    max_len: int = 300
    filter_count: int = 200
    filter_size: int = 3
    dense_size: int = 100
    min_value_annotations: int = 20
    min_examples: int = 2

    def cnn_kwargs(self):
        return dict(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            seed=self.seed,
            max_len=self.max_len,
            filter_count=self.filter_count,
            filter_size=self.filter_size,
            dense_size=self.dense_size,
        )


def _evaluate_model(model, texts, truths):
    """Macro presence/absence P/R/F1 plus top-1 precision over one test set."""
    labels = list(model.label_ids)
    predicted = model.predict(texts)
    cc = ConfusionCounts.from_predictions(labels, predicted, truths)
    result = macro_prf(cc)
    top1_rows = []
    for text, truth in zip(texts, truths):
        if not truth:
            continue  # no ground truth: excluded from the top-1 denominator
        probs = model.predict_proba(text)
        top1_rows.append((max(probs, key=probs.get), truth))
    result["top1_precision"] = top1_precision(top1_rows) if top1_rows else None
    result["support"] = {lab: cc.support(lab) for lab in labels}
    return result


def train_hierarchy(taxonomy, embedding_model, merged_labels, split, config=None):
    """Train every classifier of the hierarchy from merged expert labels.

    ``merged_labels`` maps (policy_id, segment_index) -> (categories,
    attribute_value pairs, text), i.e. the output of union_expert_labels.
    Returns (hierarchy, report) where the report carries per-model metrics
    computed on the test side of the split.
    """
    config = config or TrainingConfig()
    train_rows, test_rows = [], []
    for (policy_id, _idx), (cats, pairs, text) in sorted(merged_labels.items()):
        row = (text, set(cats), set(pairs))
        if policy_id in split.train_policy_ids:
            train_rows.append(row)
        elif policy_id in split.test_policy_ids:
            test_rows.append(row)

    if not train_rows:
        raise ValueError("no training segments in the split")

    report = {}

    segment_labels = taxonomy.category_ids("segment")
    seg_model = CnnTextClassifier(
        embedding_model=embedding_model,
        label_ids=tuple(segment_labels),
        **config.cnn_kwargs(),
    )
    seg_X = [text for text, _, _ in train_rows]
    seg_y = [cats & set(segment_labels) for _, cats, _ in train_rows]
    seg_model.fit(seg_X, seg_y)
    if test_rows:
        report["segment-categories"] = _evaluate_model(
            seg_model,
            [t for t, _, _ in test_rows],
            [c & set(segment_labels) for _, c, _ in test_rows],
        )

    query_labels = taxonomy.category_ids("query")
    query_model = CnnTextClassifier(
        embedding_model=embedding_model,
        label_ids=tuple(query_labels),
        **config.cnn_kwargs(),
    )
    q_rows = [
        (text, cats & set(query_labels))
        for text, cats, _ in train_rows
        if cats & set(query_labels)
    ]
    query_model.fit([t for t, _ in q_rows], [c for _, c in q_rows])
    if test_rows:
        q_test = [
            (t, c & set(query_labels)) for t, c, _ in test_rows if c & set(query_labels)
        ]
        if q_test:
            report["query-categories"] = _evaluate_model(
                query_model, [t for t, _ in q_test], [c for _, c in q_test]
            )

    # attribute-level models: each trains only on segments whose categories
    # own the attribute, with rare values dropped from the training targets
    value_counts = {}
    for _text, _cats, pairs in train_rows:
        for pair in pairs:
            value_counts[pair] = value_counts.get(pair, 0) + 1

    attribute_models = {}
    for attr in taxonomy.attributes:
        owners = set(taxonomy.categories_owning(attr.id))
        rows = [
            (text, {v for a, v in pairs if a == attr.id})
            for text, cats, pairs in train_rows
            if cats & owners
        ]
        if len(rows) < config.min_examples:
            warnings.warn(
                f"attribute {attr.id!r}: {len(rows)} training segments, model skipped"
            )
            continue
        trainable = {
            v
            for v in attr.value_ids()
            if value_counts.get((attr.id, v), 0) > config.min_value_annotations
        }
        model = CnnTextClassifier(
            embedding_model=embedding_model,
            label_ids=tuple(attr.value_ids()),
            **config.cnn_kwargs(),
        )
        model.fit([t for t, _ in rows], [vals & trainable for _, vals in rows])
        attribute_models[attr.id] = model
        if test_rows:
            a_test = [
                (text, {v for a, v in pairs if a == attr.id})
                for text, cats, pairs in test_rows
                if cats & owners
            ]
            if a_test:
                report[f"attribute:{attr.id}"] = _evaluate_model(
                    model, [t for t, _ in a_test], [v for _, v in a_test]
                )

    hierarchy = ClassifierHierarchy(
        taxonomy=taxonomy,
        segment_category_model=seg_model,
        query_category_model=query_model,
        attribute_models=attribute_models,
        polarity_model=attribute_models.get(POLARITY_ATTRIBUTE),
    )
    return hierarchy, report


# ---------------------------------------------------------------------------
# Persistence: directory of per-model files plus a manifest
# ---------------------------------------------------------------------------


def taxonomy_checksum(taxonomy):
    return hashlib.sha256(taxonomy.to_json().encode("utf-8")).hexdigest()


def save_hierarchy(hierarchy, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_classifier(hierarchy.segment_category_model, directory / "segment_categories.bin")
    save_classifier(hierarchy.query_category_model, directory / "query_categories.bin")
    for aid, model in hierarchy.attribute_models.items():
        save_classifier(model, directory / f"attribute__{aid}.bin")
    manifest = {
        "taxonomy_checksum": taxonomy_checksum(hierarchy.taxonomy),
        "embedding_fingerprint": hierarchy.embedding_model.fingerprint(),
        "attributes": sorted(hierarchy.attribute_models),
        "has_polarity": hierarchy.polarity_model is not None,
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return directory


def load_hierarchy(directory, taxonomy, embedding_model):
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise ModelPersistenceError(f"no manifest in {directory}")
    manifest = json.loads(manifest_path.read_text())
    if manifest["taxonomy_checksum"] != taxonomy_checksum(taxonomy):
        raise ModelPersistenceError("hierarchy was trained against a different taxonomy")
    if manifest["embedding_fingerprint"] != embedding_model.fingerprint():
        raise ModelPersistenceError("hierarchy was trained against different embeddings")
    attribute_models = {
        aid: load_classifier(directory / f"attribute__{aid}.bin", embedding_model)
        for aid in manifest["attributes"]
    }
    return ClassifierHierarchy(
        taxonomy=taxonomy,
        segment_category_model=load_classifier(
            directory / "segment_categories.bin", embedding_model
        ),
        query_category_model=load_classifier(
            directory / "query_categories.bin", embedding_model
        ),
        attribute_models=attribute_models,
        polarity_model=attribute_models.get(POLARITY_ATTRIBUTE)
        if manifest["has_polarity"]
        else None,
    )
