"""Labeled feature data: CSV ingest, row-major flattening, centering and a
synthetic face-like generator for desk-scale experiments.

CSV layout is one sample per line, ``label,f1,...,fp``, no header.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CsvParseError, InvalidInputError


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LabeledDataset:
    features: np.ndarray
    labels: np.ndarray
    class_count: int

    def __post_init__(self):
        X = _frozen(self.features, float)
        y = _frozen(self.labels, np.int64)
        if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
            raise InvalidInputError(f"features must be a non-empty 2-D matrix, got shape {X.shape}")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise InvalidInputError(f"{y.shape[0] if y.ndim == 1 else y.shape} labels for {X.shape[0]} rows")
        if self.class_count < 1:
            raise InvalidInputError("class_count must be >= 1")
        if y.min() < 0 or y.max() >= self.class_count:
            raise InvalidInputError(f"labels must lie in [0, {self.class_count})")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def p(self):
        return self.features.shape[1]


@dataclass(frozen=True)
class CenteringInfo:
    mean: np.ndarray


def flatten_image(img) -> np.ndarray:
    """Concatenate the rows of an h x w image into a length h*w vector."""
    a = np.asarray(img, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise InvalidInputError(f"expected a non-empty 2-D image, got shape {a.shape}")
    return a.reshape(-1).copy()


def center(ds: LabeledDataset) -> tuple[LabeledDataset, CenteringInfo]:
    mean = ds.features.mean(axis=0)
    info = CenteringInfo(mean=_frozen(mean, float))
    return apply_centering(ds, info), info


def apply_centering(ds: LabeledDataset, info: CenteringInfo) -> LabeledDataset:
    mean = np.asarray(info.mean, dtype=float)
    if mean.shape != (ds.p,):
        raise InvalidInputError(f"mean has shape {mean.shape}, dataset has {ds.p} features")
    return LabeledDataset(ds.features - mean, ds.labels, ds.class_count)


def load_csv(path) -> LabeledDataset:
    """Parse a label-first CSV file.

    Labels are remapped to contiguous ids in order of first appearance.
    Errors name the offending 1-based line number.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CsvParseError(f"cannot read file ({exc.strerror or exc})", path=path) from exc

    rows, raw_labels = [], []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        fields = line.split(",")
        if len(fields) < 2:
            raise CsvParseError("expected a label and at least one feature", lineno, path)
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise CsvParseError(f"ragged row: {len(fields) - 1} features, expected {width - 1}", lineno, path)
        try:
            raw_labels.append(int(fields[0]))
        except ValueError:
            raise CsvParseError(f"label {fields[0]!r} is not an integer", lineno, path) from None
        try:
            rows.append([float(f) for f in fields[1:]])
        except ValueError as exc:
            raise CsvParseError(f"non-numeric feature ({exc})", lineno, path) from None
    if not rows:
        raise CsvParseError("no samples found", path=path)

    remap: dict[int, int] = {}
    labels = [remap.setdefault(lab, len(remap)) for lab in raw_labels]
    return LabeledDataset(np.array(rows), np.array(labels), len(remap))


def write_csv(ds: LabeledDataset, path) -> None:
    # repr() round-trips float64 exactly and is deterministic
    lines = [
        ",".join([str(int(lab))] + [repr(float(v)) for v in row])
        for lab, row in zip(ds.labels, ds.features)
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def synth_faces(classes, per_class_train, per_class_test, p, noise, seed):
    """Gaussian clusters around per-class means drawn uniformly from [0, 1)^p.

    Train and test share the class means; each sample adds isotropic noise with
    standard deviation ``noise``. Rows are grouped by class.
    """
    for name, v in [("classes", classes), ("per_class_train", per_class_train),
                    ("per_class_test", per_class_test), ("p", p)]:
        if int(v) < 1:
            raise InvalidInputError(f"{name} must be >= 1, got {v}")
    if noise < 0:
        raise InvalidInputError(f"noise must be >= 0, got {noise}")

    rng = np.random.default_rng(seed)
    means = rng.uniform(0.0, 1.0, size=(classes, p))

    def draw(per_class):
        y = np.repeat(np.arange(classes), per_class)
        X = means[y]
        if noise > 0:
            X = X + noise * rng.standard_normal(X.shape)
        return LabeledDataset(X, y, classes)

    train = draw(per_class_train)
    test = draw(per_class_test)
    return train, test
