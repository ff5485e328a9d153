"""
Synthetic two-class image blobs.
"""

import logging

import numpy as np

from ..core.errors import DataError
from ..core.rng import make_stream
from .records import IMAGE_SHAPE, DatasetSplit, Partition

logger = logging.getLogger(__name__)

BLOCK = 8


def block_pattern(rng: np.random.Generator) -> np.ndarray:
    """Random +-1 pattern constant on 8x8 blocks of each channel."""
    c, h, w = IMAGE_SHAPE
    signs = rng.choice([-1.0, 1.0], size=(c, h // BLOCK, w // BLOCK))
    return np.repeat(np.repeat(signs, BLOCK, axis=1), BLOCK, axis=2)


def synthetic_blobs(n_per_class: int = 500, margin_sigma: float = 10.0, seed: int = 0,
                    sigma: float = 0.02) -> DatasetSplit:
    """
    Two Gaussian classes whose means differ by ``margin_sigma`` noise
    standard deviations along a block pattern.

    Each class is split 4:1 into train and test.
    """
    if n_per_class < 2:
        raise DataError(f"blobs need at least 2 samples per class, got {n_per_class}")
    if margin_sigma < 0 or sigma <= 0:
        raise DataError("blob margin must be >= 0 and sigma > 0")
    rng = make_stream(seed, "data/blobs")
    direction = block_pattern(rng)
    n_train = (4 * n_per_class) // 5
    half = margin_sigma * sigma / 2.0

    train_x, train_y, test_x, test_y = [], [], [], []
    for label, sign in ((0, -1.0), (1, 1.0)):
        mean = 0.5 + sign * half * direction
        samples = np.clip(mean[None] + sigma * rng.standard_normal((n_per_class,) + IMAGE_SHAPE), 0.0, 1.0)
        train_x.append(samples[:n_train])
        test_x.append(samples[n_train:])
        train_y += [label] * n_train
        test_y += [label] * (n_per_class - n_train)

    train_ids = tuple(f"blobs:{label}:{i}" for label in (0, 1) for i in range(n_train))
    test_ids = tuple(f"blobs:{label}:{i}" for label in (0, 1) for i in range(n_train, n_per_class))
    split = DatasetSplit(
        Partition(np.concatenate(train_x), np.array(train_y), train_ids),
        Partition(np.concatenate(test_x), np.array(test_y), test_ids),
        class_names=("blob_minus", "blob_plus"),
        source="blobs",
    )
    logger.debug(f"Generated blobs: margin={margin_sigma} sigma={sigma} sizes={split.sizes}")
    return split
