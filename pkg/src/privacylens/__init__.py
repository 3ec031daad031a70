"""Privacy-policy analysis: segmentation, hierarchical multi-label
annotation, free-form question answering, and privacy-icon assignment."""

from . import corpus_io, embeddings, hierarchy, icons, metrics, neuralnet, qa, segmenter
from .taxonomy import Taxonomy, load_default_taxonomy, load_taxonomy

__version__ = "0.1.0"

__all__ = [
    "corpus_io",
    "embeddings",
    "hierarchy",
    "icons",
    "metrics",
    "neuralnet",
    "qa",
    "segmenter",
    "Taxonomy",
    "load_taxonomy",
    "load_default_taxonomy",
]
