from __future__ import annotations

import numpy as np
import pytest

from ldbounds.data import Dataset, make_dataset, sort_dataset_1d
from ldbounds.rng import make_generator


def random_sorted(n: int, seed: int) -> Dataset:
    gen = make_generator(seed)
    return sort_dataset_1d(make_dataset(gen.random((n, 1))))


def random_dataset(n: int, d: int, seed: int) -> Dataset:
    gen = make_generator(seed)
    return make_dataset(gen.random((n, d)))


@pytest.fixture
def gen():
    return np.random.default_rng(12345)
