"""
Image records and train/test splits.
"""

from dataclasses import dataclass, field
from typing import Iterator, List, Tuple

import numpy as np

from ..core.errors import DataError

IMAGE_SHAPE = (3, 32, 32)


@dataclass(frozen=True, eq=False)
class ImageRecord:
    pixels: np.ndarray
    label: int
    source_id: str

    def __post_init__(self) -> None:
        pixels = np.asarray(self.pixels, dtype=float)
        if pixels.shape != IMAGE_SHAPE:
            raise DataError(f"{self.source_id}: image shape {pixels.shape}, expected {IMAGE_SHAPE}")
        if pixels.size and (pixels.min() < 0.0 or pixels.max() > 1.0):
            raise DataError(f"{self.source_id}: pixel values outside [0, 1]")
        if self.label not in (0, 1):
            raise DataError(f"{self.source_id}: label {self.label} is not 0 or 1")
        object.__setattr__(self, "pixels", pixels)


@dataclass(frozen=True, eq=False)
class Partition:
    """Stacked images (N, 3, 32, 32), labels (N,) and source ids."""

    images: np.ndarray
    labels: np.ndarray
    ids: Tuple[str, ...]

    def __post_init__(self) -> None:
        images = np.asarray(self.images, dtype=float)
        labels = np.asarray(self.labels, dtype=int)
        if images.ndim != 4 or images.shape[1:] != IMAGE_SHAPE:
            raise DataError(f"images have shape {images.shape}, expected (N,) + {IMAGE_SHAPE}")
        if labels.shape != (images.shape[0],) or len(self.ids) != images.shape[0]:
            raise DataError("images, labels and ids differ in length")
        if images.size and (images.min() < 0.0 or images.max() > 1.0):
            raise DataError("pixel values outside [0, 1]")
        if np.any((labels != 0) & (labels != 1)):
            raise DataError("labels must be 0 or 1")
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "ids", tuple(self.ids))

    def __len__(self) -> int:
        return self.labels.shape[0]

    @classmethod
    def from_records(cls, records: List[ImageRecord]) -> "Partition":
        if not records:
            return cls(np.zeros((0,) + IMAGE_SHAPE), np.zeros(0, dtype=int), ())
        return cls(np.stack([r.pixels for r in records]), np.array([r.label for r in records]),
                   tuple(r.source_id for r in records))

    def records(self) -> Iterator[ImageRecord]:
        for image, label, source_id in zip(self.images, self.labels, self.ids):
            yield ImageRecord(image, int(label), source_id)

    def class_counts(self) -> Tuple[int, int]:
        return int(np.sum(self.labels == 0)), int(np.sum(self.labels == 1))


@dataclass(frozen=True, eq=False)
class DatasetSplit:
    train: Partition
    test: Partition
    class_names: Tuple[str, str] = ("class_0", "class_1")
    source: str = field(default="memory")

    def __post_init__(self) -> None:
        counts = self.train.class_counts()
        if counts[0] != counts[1]:
            raise DataError(f"training split is unbalanced: {counts[0]} vs {counts[1]}")
        overlap = set(self.train.ids) & set(self.test.ids)
        if overlap:
            raise DataError(f"{len(overlap)} records appear in both train and test")

    @property
    def sizes(self) -> Tuple[int, int]:
        return len(self.train), len(self.test)
