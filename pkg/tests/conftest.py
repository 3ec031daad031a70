import sys
import warnings
from pathlib import Path

import pytest


def pytest_runtest_logreport(report):
    """One visible PASS/FAIL line per acceptance criterion."""
    if "test_acceptance" not in report.nodeid or report.when != "call":
        return
    name = report.nodeid.split("::")[-1]
    status = "PASS" if report.passed else "FAIL"
    print(f"\n[{status}] {name} ({report.duration:.1f}s)", flush=True)

sys.path.insert(0, str(Path(__file__).parent))

from synthetic import (  # noqa: E402
    full_split,
    marker_embedding,
    mini_taxonomy,
    synthetic_policies,
)

from privacylens.corpus_io import union_expert_labels  # noqa: E402
from privacylens.hierarchy import TrainingConfig, train_hierarchy  # noqa: E402


@pytest.fixture(scope="session")
def mini_tax():
    return mini_taxonomy()


@pytest.fixture(scope="session")
def marker_emb():
    return marker_embedding(dim=16, seed=0)


@pytest.fixture(scope="session")
def small_corpus():
    """20 policies x 10 segments with polarity markers."""
    segments, records = synthetic_policies(20, 10, seed=0, with_polarity=True)
    return segments, records


SMALL_CONFIG = TrainingConfig(
    epochs=30,
    batch_size=10,
    learning_rate=3e-2,
    max_len=16,
    filter_count=8,
    dense_size=16,
    min_value_annotations=3,
)


@pytest.fixture(scope="session")
def small_hierarchy(mini_tax, marker_emb, small_corpus):
    """A trained miniature hierarchy shared across test modules."""
    _segments, records = small_corpus
    merged = union_expert_labels(records)
    split = full_split(records, test_fraction=0.2, seed=1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        hierarchy, report = train_hierarchy(mini_tax, marker_emb, merged, split, SMALL_CONFIG)
    return hierarchy, report


@pytest.fixture(scope="session")
def flat_semvec_model(mini_tax, marker_emb, small_corpus):
    from privacylens.qa import train_semvec_model

    _segments, records = small_corpus
    merged = union_expert_labels(records)
    split = full_split(records, test_fraction=0.2, seed=1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return train_semvec_model(mini_tax, marker_emb, merged, split, SMALL_CONFIG)
