from pathlib import Path

import pytest

from scanpath.synthetic import blob_dataset, peaked_saliency_dataset

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def lengths_path() -> Path:
    """Two records, four scanpaths of lengths 2, 3, 3 and 8."""
    return FIXTURES / "lengths.jsonl"


@pytest.fixture
def blobs():
    return blob_dataset(n=4, size=16, seed=0)


@pytest.fixture
def peaked():
    return peaked_saliency_dataset(n=6, grid=16, seed=0, observers=2)
