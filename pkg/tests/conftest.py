import numpy as np
import pytest

from floral.datasets import Dataset, MulticlassDataset


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def make_blobs(n_per_class: int, centers, spread: float, seed: int) -> MulticlassDataset:
    """Well-separated Gaussian clusters, one per class, labels 1..M."""
    gen = np.random.default_rng(seed)
    xs, ys = [], []
    for cls, center in enumerate(centers, start=1):
        xs.append(gen.normal(0.0, spread, (n_per_class, len(center))) + np.asarray(center))
        ys.append(np.full(n_per_class, cls, dtype=np.int64))
    X = np.vstack(xs)
    y = np.concatenate(ys)
    perm = gen.permutation(X.shape[0])
    return MulticlassDataset(features=X[perm], class_labels=y[perm])


def tiny_dataset() -> Dataset:
    X = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    y = np.array([1, 1, -1, -1])
    return Dataset(features=X, labels=y)
