"""
Dataset loaders: CIFAR-10 binary batches, the CNQE1 raw tensor format and
synthetic blobs, plus the dataset manifest.
"""

import hashlib
import logging
import struct
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np

from ..core.config import DatasetConfig
from ..core.errors import ConfigError, DataError, NumericError
from ..core.rng import make_stream
from .records import IMAGE_SHAPE, DatasetSplit, Partition
from .synthetic import synthetic_blobs
from .transforms import resize_bilinear

logger = logging.getLogger(__name__)

CIFAR_RECORD = 3073
CIFAR_BATCHES = tuple(f"data_batch_{i}.bin" for i in range(1, 6))
CIFAR_CLASSES = ("airplane", "automobile", "bird", "cat", "deer", "dog", "frog", "horse", "ship", "truck")
RAW_MAGIC = b"CNQE1"
_RAW_HEADER = struct.Struct("<5sII")
PIXELS = int(np.prod(IMAGE_SHAPE))


def _cifar_dir(path: Path) -> Path:
    nested = path / "cifar-10-batches-bin"
    return nested if nested.is_dir() else path


def read_cifar_batch(path: Path) -> Tuple[np.ndarray, np.ndarray]:
    """Labels (N,) and raw uint8 pixels (N, 3072) of one binary batch."""
    if not path.exists():
        raise DataError(f"CIFAR-10 batch not found: {path}")
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size == 0 or raw.size % CIFAR_RECORD:
        raise DataError(f"{path.name}: {raw.size} bytes is not a whole number of {CIFAR_RECORD}-byte records")
    records = raw.reshape(-1, CIFAR_RECORD)
    labels = records[:, 0].astype(int)
    if labels.max() > 9:
        raise DataError(f"{path.name}: label byte {labels.max()} out of range")
    return labels, records[:, 1:]


def load_cifar10_pair(path: Union[str, Path], class_a: int, class_b: int, seed: int = 0,
                      train_per_class: int = 400, test_per_class: int = 100) -> DatasetSplit:
    """Two CIFAR-10 classes as labels 0 (``class_a``) and 1 (``class_b``), pixels scaled to [0, 1]."""
    if class_a == class_b:
        raise ConfigError("class_a and class_b must differ")
    root = _cifar_dir(Path(path))
    labels, pixels, ids = [], [], []
    for name in CIFAR_BATCHES:
        batch_labels, batch_pixels = read_cifar_batch(root / name)
        keep = np.flatnonzero((batch_labels == class_a) | (batch_labels == class_b))
        labels.append(batch_labels[keep])
        pixels.append(batch_pixels[keep])
        ids += [f"{name}:{i}" for i in keep]
    labels_all = np.concatenate(labels)
    pixels_all = np.concatenate(pixels)

    rng = make_stream(seed, "data/split")
    train_idx: List[int] = []
    test_idx: List[int] = []
    for cls in (class_a, class_b):
        members = np.flatnonzero(labels_all == cls)
        need = train_per_class + test_per_class
        if members.size < need:
            raise DataError(f"class {cls} has {members.size} samples, need {need}")
        chosen = members[rng.permutation(members.size)[:need]]
        train_idx += chosen[:train_per_class].tolist()
        test_idx += chosen[train_per_class:].tolist()

    def partition(index: List[int]) -> Partition:
        idx = np.asarray(index, dtype=int)
        images = pixels_all[idx].reshape((-1,) + IMAGE_SHAPE).astype(float) / 255.0
        return Partition(images, (labels_all[idx] == class_b).astype(int), tuple(ids[i] for i in idx))

    split = DatasetSplit(partition(train_idx), partition(test_idx),
                         class_names=(CIFAR_CLASSES[class_a], CIFAR_CLASSES[class_b]), source="cifar10")
    logger.info(f"Loaded CIFAR-10 {split.class_names[0]}/{split.class_names[1]}: sizes={split.sizes}")
    return split


def write_raw_tensor(path: Union[str, Path], split: DatasetSplit) -> None:
    """Write ``split`` in the CNQE1 format (train records first)."""
    images = np.concatenate([split.train.images, split.test.images]).astype("<f4")
    labels = np.concatenate([split.train.labels, split.test.labels]).astype(np.uint8)
    with open(path, "wb") as handle:
        handle.write(_RAW_HEADER.pack(RAW_MAGIC, len(split.train), len(split.test)))
        handle.write(labels.tobytes())
        handle.write(images.tobytes())


def load_raw_tensor(path: Union[str, Path]) -> DatasetSplit:
    path = Path(path)
    if not path.exists():
        raise DataError(f"raw tensor file not found: {path}")
    data = path.read_bytes()
    if len(data) < _RAW_HEADER.size or data[:len(RAW_MAGIC)] != RAW_MAGIC:
        raise DataError(f"{path.name}: bad magic, expected {RAW_MAGIC!r}")
    _, n_train, n_test = _RAW_HEADER.unpack_from(data)
    total = n_train + n_test
    expected = _RAW_HEADER.size + total + total * PIXELS * 4
    if len(data) != expected:
        raise DataError(f"{path.name}: header declares {total} records ({expected} bytes), file has {len(data)}")
    offset = _RAW_HEADER.size
    labels = np.frombuffer(data, dtype=np.uint8, count=total, offset=offset).astype(int)
    pixels = np.frombuffer(data, dtype="<f4", count=total * PIXELS, offset=offset + total)
    images = pixels.astype(float).reshape((total,) + IMAGE_SHAPE)
    if images.size and (images.min() < 0.0 or images.max() > 1.0):
        raise DataError(f"{path.name}: pixel values outside [0, 1]")
    ids = tuple(f"raw:{i}" for i in range(total))
    return DatasetSplit(Partition(images[:n_train], labels[:n_train], ids[:n_train]),
                        Partition(images[n_train:], labels[n_train:], ids[n_train:]), source="raw")


def _resized_partition(images: np.ndarray, labels: np.ndarray, prefix: str) -> Partition:
    images = np.asarray(images, dtype=float)
    if images.ndim != 4 or images.shape[1] != IMAGE_SHAPE[0]:
        raise DataError(f"{prefix} images have shape {images.shape}, expected (N, 3, H, W)")
    try:
        resized = [resize_bilinear(image, IMAGE_SHAPE[1]) for image in images]
    except NumericError as e:
        raise DataError(f"{prefix} images: {e}") from e
    stacked = np.stack(resized) if resized else np.zeros((0,) + IMAGE_SHAPE)
    return Partition(stacked, np.asarray(labels).astype(int), tuple(f"{prefix}:{i}" for i in range(len(images))))


def pack_arrays(npz_path: Union[str, Path], out_path: Union[str, Path]) -> DatasetSplit:
    """Convert an ``.npz`` of (N, 3, H, W) arrays in [0, 1] into the CNQE1 format.

    Expects ``train_images``, ``train_labels``, ``test_images`` and ``test_labels``;
    images larger than 32x32 are downsampled bilinearly.
    """
    try:
        with np.load(npz_path) as arrays:
            train = _resized_partition(arrays["train_images"], arrays["train_labels"], "train")
            test = _resized_partition(arrays["test_images"], arrays["test_labels"], "test")
    except KeyError as e:
        raise DataError(f"{npz_path}: missing array {e}") from e
    except (OSError, ValueError) as e:
        raise DataError(f"cannot read {npz_path}: {e}") from e
    split = DatasetSplit(train, test, source="raw")
    write_raw_tensor(out_path, split)
    logger.info(f"Packed {len(train)} train and {len(test)} test records into {out_path}")
    return split


def load_dataset(config: DatasetConfig) -> DatasetSplit:
    """Dispatch on ``config.source``."""
    if config.source == "blobs":
        return synthetic_blobs(config.n_per_class, config.margin_sigma, config.seed, config.sigma)
    path = config.resolved_path()
    if path is None:
        raise DataError(f"dataset source '{config.source}' needs dataset.path or CNQE_DATA_DIR")
    if config.source == "raw":
        return load_raw_tensor(path)
    return load_cifar10_pair(path, config.class_a, config.class_b, config.seed,
                             config.train_per_class, config.test_per_class)


def _record_digest(image: np.ndarray, label: int) -> str:
    digest = hashlib.sha256(bytes([int(label)]) + np.asarray(image, dtype="<f8").tobytes())
    return digest.hexdigest()[:16]


def dataset_manifest(split: DatasetSplit, config: DatasetConfig) -> Dict[str, Any]:
    """Class pair, seed, sizes and per-record checksums."""
    def entries(partition: Partition) -> List[List[Any]]:
        return [[sid, int(label), _record_digest(image, label)]
                for image, label, sid in zip(partition.images, partition.labels, partition.ids)]

    return {
        "source": split.source,
        "class_names": list(split.class_names),
        "class_pair": [config.class_a, config.class_b] if split.source == "cifar10" else None,
        "seed": config.seed,
        "sizes": {"train": len(split.train), "test": len(split.test)},
        "train": entries(split.train),
        "test": entries(split.test),
    }
