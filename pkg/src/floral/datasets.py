"""Dataset generation, poisoning, and CSV persistence.

CSV layout: d feature columns followed by one label column, plus an optional
trailing flag column named ``poisoned`` (0/1) that records which rows carry a
flipped label. Files with the flag column start with a header row naming the
columns; plain feature+label files are headerless. Binary labels are +1/-1;
multiclass files use integer class labels 1..M.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DatasetFormatError(ValueError):
    """Raised when a CSV row cannot be parsed or a label is out of domain."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Dataset:
    """Binary classification data with optional poisoning provenance.

    ``clean_labels`` holds the pre-attack ground truth; ``poisoned_indices``
    is always exactly the set of rows where ``labels`` disagrees with it.
    """

    features: np.ndarray
    labels: np.ndarray
    clean_labels: np.ndarray | None = None
    poisoned_indices: frozenset[int] = field(default=frozenset())

    def __post_init__(self):
        X = _frozen(np.asarray(self.features, dtype=np.float64))
        y = _frozen(np.asarray(self.labels, dtype=np.int64))
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        if X.ndim != 2:
            raise ValueError(f"features must be 2-d, got shape {X.shape}")
        n = X.shape[0]
        if n < 2:
            raise ValueError(f"need at least 2 rows, got {n}")
        if y.shape != (n,):
            raise ValueError(f"labels shape {y.shape} does not match {n} rows")
        if not np.isin(y, (-1, 1)).all():
            bad = y[~np.isin(y, (-1, 1))][0]
            raise ValueError(f"labels must be +1 or -1, found {bad}")
        if self.clean_labels is not None:
            yc = _frozen(np.asarray(self.clean_labels, dtype=np.int64))
            object.__setattr__(self, "clean_labels", yc)
            if yc.shape != (n,):
                raise ValueError("clean_labels length mismatch")
            if not np.isin(yc, (-1, 1)).all():
                raise ValueError("clean_labels must be +1 or -1")
            if len(np.unique(yc)) < 2:
                raise ValueError("both classes must be present in clean_labels")
            derived = frozenset(int(i) for i in np.nonzero(y != yc)[0])
            if self.poisoned_indices and frozenset(self.poisoned_indices) != derived:
                raise ValueError("poisoned_indices disagrees with labels vs clean_labels")
            object.__setattr__(self, "poisoned_indices", derived)
        elif self.poisoned_indices:
            raise ValueError("poisoned_indices given without clean_labels")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class MulticlassDataset:
    """Features with integer class labels 1..M, every class occurring."""

    features: np.ndarray
    class_labels: np.ndarray

    def __post_init__(self):
        X = _frozen(np.asarray(self.features, dtype=np.float64))
        y = _frozen(np.asarray(self.class_labels, dtype=np.int64))
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "class_labels", y)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise ValueError("features/class_labels shape mismatch")
        m = int(y.max())
        if m < 2 or int(y.min()) < 1:
            raise ValueError("class labels must cover {1..M} with M >= 2")
        present = set(np.unique(y).tolist())
        missing = set(range(1, m + 1)) - present
        if missing:
            raise ValueError(f"classes absent from data: {sorted(missing)}")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def num_classes(self) -> int:
        return int(self.class_labels.max())


def generate_moons(n: int, noise_sd: float, seed: int) -> Dataset:
    """Two interleaving half-circles with Gaussian coordinate noise.

    Class +1 points are (cos t, sin t) and class -1 points are
    (1 - cos t, 0.5 - sin t) for t uniform on [0, pi], n/2 per class.
    Pure function of (n, noise_sd, seed).
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if n % 2 != 0:
        raise ValueError(f"n must be even for a balanced split, got {n}")
    if noise_sd < 0:
        raise ValueError(f"noise_sd must be nonnegative, got {noise_sd}")
    half = n // 2
    rng = np.random.default_rng(seed)
    t_pos = rng.uniform(0.0, np.pi, half)
    t_neg = rng.uniform(0.0, np.pi, half)
    pos = np.column_stack([np.cos(t_pos), np.sin(t_pos)])
    neg = np.column_stack([1.0 - np.cos(t_neg), 0.5 - np.sin(t_neg)])
    X = np.vstack([pos, neg]) + rng.normal(0.0, noise_sd, (n, 2))
    y = np.concatenate([np.ones(half, dtype=np.int64), -np.ones(half, dtype=np.int64)])
    return Dataset(features=X, labels=y)


def flip_count(fraction: float, n: int) -> int:
    """floor(fraction * n), guarded against float representation error."""
    return int(math.floor(fraction * n + 1e-9))


def poison_by_boundary_distance(ds: Dataset, fraction: float, seed: int) -> Dataset:
    """Flip the labels of the points farthest from a linear separator.

    A least-squares separator (w, c minimizing sum (w.x_i + c - y_i)^2) is fit
    on the clean labels; rows are ranked by absolute signed distance
    |w.x + c| / ||w|| and the top floor(fraction * n) are flipped. Ties break
    by ascending row index. The seed is accepted for interface uniformity but
    the selection itself is deterministic.
    """
    del seed
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must lie in [0, 1], got {fraction}")
    if ds.clean_labels is not None and ds.poisoned_indices:
        raise ValueError("dataset is already poisoned")
    X, y = ds.features, ds.labels
    n = ds.n
    A = np.column_stack([X, np.ones(n)])
    coef, *_ = np.linalg.lstsq(A, y.astype(np.float64), rcond=None)
    w, c = coef[:-1], coef[-1]
    norm = float(np.linalg.norm(w))
    if norm == 0.0:
        raise ValueError("degenerate separator: zero weight vector")
    dist = np.abs(X @ w + c) / norm
    count = flip_count(fraction, n)
    order = np.lexsort((np.arange(n), -dist))
    flipped = order[:count]
    new_labels = y.copy()
    new_labels[flipped] = -new_labels[flipped]
    return Dataset(features=X, labels=new_labels, clean_labels=y)


def train_test_split(ds: Dataset, train_size: int, seed: int) -> tuple[Dataset, Dataset]:
    """Shuffle rows with the given seed and split off a training set."""
    if not 2 <= train_size <= ds.n - 2:
        raise ValueError(f"train_size {train_size} leaves no usable split of {ds.n}")
    perm = np.random.default_rng(seed).permutation(ds.n)
    tr, te = perm[:train_size], perm[train_size:]
    return (Dataset(features=ds.features[tr], labels=ds.labels[tr]),
            Dataset(features=ds.features[te], labels=ds.labels[te]))


def standardize(train: Dataset, test: Dataset) -> tuple[Dataset, Dataset]:
    """Center and scale both splits using the training split's statistics."""
    mean = train.features.mean(axis=0)
    scale = train.features.std(axis=0)
    scale = np.where(scale == 0.0, 1.0, scale)

    def apply(ds: Dataset) -> Dataset:
        return Dataset(features=(ds.features - mean) / scale, labels=ds.labels,
                       clean_labels=ds.clean_labels)

    return apply(train), apply(test)


def _format_row(values) -> str:
    return ",".join(repr(float(v)) if isinstance(v, float) else str(int(v)) for v in values)


def save_csv(ds: Dataset | MulticlassDataset, path: str | Path) -> None:
    """Write a dataset; the provenance flag column (with header) only when present."""
    path = Path(path)
    lines = []
    if isinstance(ds, MulticlassDataset):
        for x, y in zip(ds.features, ds.class_labels):
            lines.append(_format_row([*map(float, x), int(y)]))
    elif ds.clean_labels is not None:
        names = [f"x{j}" for j in range(ds.dim)] + ["label", "poisoned"]
        lines.append(",".join(names))
        flags = np.zeros(ds.n, dtype=np.int64)
        flags[list(ds.poisoned_indices)] = 1
        for x, y, f in zip(ds.features, ds.labels, flags):
            lines.append(_format_row([*map(float, x), int(y), int(f)]))
    else:
        for x, y in zip(ds.features, ds.labels):
            lines.append(_format_row([*map(float, x), int(y)]))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def _parse_numeric_row(line: str, row_no: int):
    parts = line.split(",")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise DatasetFormatError(f"row {row_no}: cannot parse {line!r} as numbers") from None


def load_csv(path: str | Path, header: bool | None = None,
             multiclass: bool = False) -> Dataset | MulticlassDataset:
    """Load a dataset CSV.

    header=None auto-detects: a first line that fails numeric parse is treated
    as a header. header=True skips the first line only if it fails numeric
    parse; header=False never skips, so a stray header raises a row-1 error.
    """
    path = Path(path)
    raw = [ln for ln in path.read_text(encoding="ascii").splitlines() if ln.strip()]
    if not raw:
        raise DatasetFormatError(f"{path}: empty file")
    names: list[str] | None = None
    start = 0
    first_numeric = True
    try:
        _parse_numeric_row(raw[0], 1)
    except DatasetFormatError:
        first_numeric = False
    if (header is None or header is True) and not first_numeric:
        names = [p.strip() for p in raw[0].split(",")]
        start = 1
    rows = []
    for i, line in enumerate(raw[start:], start=start + 1):
        rows.append(_parse_numeric_row(line, i))
    if not rows:
        raise DatasetFormatError(f"{path}: no data rows")
    width = len(rows[0])
    for i, r in enumerate(rows, start=start + 1):
        if len(r) != width:
            raise DatasetFormatError(f"row {i}: expected {width} columns, found {len(r)}")
    has_flag = names is not None and names[-1] == "poisoned"
    ncols = width - (2 if has_flag else 1)
    if ncols < 1:
        raise DatasetFormatError(f"{path}: need at least one feature column")
    data = np.asarray(rows, dtype=np.float64)
    X = data[:, :ncols]
    labels_f = data[:, ncols]
    labels = labels_f.astype(np.int64)
    if not np.array_equal(labels_f, labels):
        bad = int(np.nonzero(labels_f != labels)[0][0])
        raise DatasetFormatError(f"row {bad + start + 1}: non-integer label {labels_f[bad]}")

    if multiclass:
        if has_flag:
            raise DatasetFormatError("poisoned flag column is not supported in multiclass mode")
        lo = int(labels.min())
        if lo < 1:
            bad = int(np.nonzero(labels < 1)[0][0])
            raise DatasetFormatError(
                f"row {bad + start + 1}: invalid class label {labels[bad]} (must be in 1..M)")
        return MulticlassDataset(features=X, class_labels=labels)

    bad_rows = np.nonzero(~np.isin(labels, (-1, 1)))[0]
    if bad_rows.size:
        bad = int(bad_rows[0])
        raise DatasetFormatError(
            f"row {bad + start + 1}: invalid label {labels[bad]} (must be +1 or -1)")
    if has_flag:
        flags = data[:, -1]
        if not np.isin(flags, (0.0, 1.0)).all():
            bad = int(np.nonzero(~np.isin(flags, (0.0, 1.0)))[0][0])
            raise DatasetFormatError(f"row {bad + start + 1}: poisoned flag must be 0 or 1")
        clean = labels.copy()
        flagged = flags == 1.0
        clean[flagged] = -clean[flagged]
        return Dataset(features=X, labels=labels, clean_labels=clean)
    return Dataset(features=X, labels=labels)
