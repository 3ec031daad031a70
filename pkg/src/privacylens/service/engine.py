"""Engine state: loaded models plus an ingested-policy cache.

A model directory bundles everything the engine serves from:

    <model_dir>/taxonomy.json
    <model_dir>/embeddings.bin
    <model_dir>/classifiers/        (hierarchy manifest + per-model files)
    <model_dir>/semvec.bin          (optional; distance-baseline model)

The engine is read-only after load except the policy cache; ingestion is
the only writer and holds a lock. Replaying any request against the same
state yields the same response.
"""

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

from ..corpus_io import PolicyDocument
from ..embeddings import load_model
from ..errors import ModelPersistenceError
from ..hierarchy import load_hierarchy, present_labels
from ..icons import LabeledPolicy, assign_all
from ..neuralnet import load_classifier
from ..qa import answer_question
from ..segmenter import SegmenterConfig, segment_policy
from ..taxonomy import load_taxonomy

__all__ = ["EngineConfig", "Engine", "PolicyEntry"]

CONFIG_ENV = "ENGINE_CONFIG"
MODEL_DIR_ENV = "ENGINE_MODEL_DIR"


@dataclass
class EngineConfig:
    model_dir: str = "models"
    accept_threshold: float = 0.6  # qa.accept_threshold
    ambiguity_threshold: float = 0.2
    top_k: int = 3
    label_threshold: float = 0.5
    segmenter: SegmenterConfig = field(default_factory=SegmenterConfig)

    @classmethod
    def load(cls, path=None, env=os.environ):
        """Config file (JSON) with environment overrides."""
        path = path or env.get(CONFIG_ENV)
        raw = {}
        if path:
            raw = json.loads(Path(path).read_text())
        cfg = cls(
            model_dir=raw.get("model_dir", "models"),
            accept_threshold=float(raw.get("qa.accept_threshold", 0.6)),
            ambiguity_threshold=float(raw.get("qa.ambiguity_threshold", 0.2)),
            top_k=int(raw.get("qa.top_k", 3)),
            label_threshold=float(raw.get("labels.threshold", 0.5)),
            segmenter=SegmenterConfig.from_dict(raw),
        )
        if env.get(MODEL_DIR_ENV):
            cfg.model_dir = env[MODEL_DIR_ENV]
        return cfg


@dataclass
class PolicyEntry:
    document: PolicyDocument
    segments: list
    annotations: list
    source_hash: int


class Engine:
    """Serves segmentation, labels, answers, and icons from loaded models."""

    def __init__(self, taxonomy, embedding_model, hierarchy, config=None, semvec_model=None):
        self.taxonomy = taxonomy
        self.embedding_model = embedding_model
        self.hierarchy = hierarchy
        self.semvec_model = semvec_model
        self.config = config or EngineConfig()
        self._cache = {}
        self._write_lock = threading.Lock()

    @classmethod
    def load(cls, model_dir, config=None):
        model_dir = Path(model_dir)
        if not model_dir.is_dir():
            raise ModelPersistenceError(f"model directory {model_dir} does not exist")
        taxonomy = load_taxonomy(model_dir / "taxonomy.json")
        embedding_model = load_model(model_dir / "embeddings.bin")
        hierarchy = load_hierarchy(model_dir / "classifiers", taxonomy, embedding_model)
        semvec = None
        if (model_dir / "semvec.bin").exists():
            semvec = load_classifier(model_dir / "semvec.bin", embedding_model)
        config = config or EngineConfig(model_dir=str(model_dir))
        return cls(taxonomy, embedding_model, hierarchy, config, semvec_model=semvec)

    # -- policy cache ---------------------------------------------------------

    def ingest(self, policy_id, source, url=None):
        """Segment + classify a policy; idempotent for identical sources."""
        key = hash(source)
        existing = self._cache.get(policy_id)
        if existing is not None and existing.source_hash == key:
            return existing
        doc = PolicyDocument(policy_id=policy_id, source=source, url=url)
        segments = segment_policy(doc, self.embedding_model, self.config.segmenter)
        annotations = [self.hierarchy.classify_segment(seg) for seg in segments]
        entry = PolicyEntry(
            document=doc, segments=segments, annotations=annotations, source_hash=key
        )
        with self._write_lock:
            self._cache[policy_id] = entry
        return entry

    def entry(self, policy_id):
        entry = self._cache.get(policy_id)
        if entry is None:
            raise KeyError(policy_id)
        return entry

    def policy_ids(self):
        return sorted(self._cache)

    # -- views ------------------------------------------------------------------

    def segments(self, policy_id):
        return self.entry(policy_id).segments

    def labels(self, policy_id):
        """Per-segment present labels (threshold-gated)."""
        entry = self.entry(policy_id)
        out = []
        for seg, ann in zip(entry.segments, entry.annotations):
            cats, values = present_labels(ann, self.taxonomy, self.config.label_threshold)
            out.append(
                {
                    "segment_index": seg.index,
                    "text": seg.text,
                    "categories": sorted(cats),
                    "attribute_values": [
                        {"attribute": a, "value": v} for a, v in sorted(values)
                    ],
                }
            )
        return out

    def labeled_policy(self, policy_id):
        entry = self.entry(policy_id)
        per_segment = []
        for ann in entry.annotations:
            cats, values = present_labels(ann, self.taxonomy, self.config.label_threshold)
            per_segment.append((cats, values))
        return LabeledPolicy.from_label_sets(policy_id, per_segment)

    def ask(self, policy_id, question):
        entry = self.entry(policy_id)
        return answer_question(
            self.hierarchy,
            entry.segments,
            question,
            annotations=entry.annotations,
            accept_threshold=self.config.accept_threshold,
            ambiguity_threshold=self.config.ambiguity_threshold,
            top_k=self.config.top_k,
        )

    def icons(self, policy_id, strategy="conservative"):
        return assign_all(self.labeled_policy(policy_id), strategy)
