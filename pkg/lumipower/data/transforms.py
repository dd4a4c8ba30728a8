__doc__ = """
Image preprocessing, normalization and augmentation. All functions are pure
given their inputs and an explicit random generator.
"""

from pathlib import Path
from typing import Iterable, Optional, Tuple

import cv2
import numpy as np

from lumipower.errors import DataError
from lumipower.tensor import Tensor

MAX_ROTATION_DEG = 5.0


def read_image(path: str | Path) -> np.ndarray:
    """Read a PNG/PGM intensity image (8 or 16 bit) as float64 (H, W)."""
    image = cv2.imread(Path(path).as_posix(), cv2.IMREAD_UNCHANGED)
    if image is None:
        raise DataError(f"Could not decode image {path}")
    if image.ndim == 3:
        image = cv2.cvtColor(image, cv2.COLOR_BGR2GRAY)
    return image.astype(np.float64)


def _as_2d(image) -> np.ndarray:
    data = image.data if isinstance(image, Tensor) else np.asarray(image)
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 4 and data.shape[:2] == (1, 1):
        data = data[0, 0]
    if data.ndim != 2:
        raise DataError(f"Expected a single-channel image, got shape {data.shape}")
    return data


def preprocess(
    image, target_shape: Tuple[int, int], crop_box: Optional[Tuple[int, int, int, int]] = None
) -> Tensor:
    """
    Crop to the module content and resample bilinearly.

    Parameters
    ----------
    image : np.ndarray | Tensor
        (H, W) or (1, 1, H, W) intensities.
    target_shape : Tuple[int, int]
        Output (H, W).
    crop_box : Tuple[int, int, int, int] | None
        (top, bottom, left, right), bottom/right exclusive. None keeps the full frame.

    Returns
    -------
    Tensor
        (1, 1, H, W).
    """
    data = _as_2d(image)
    if crop_box is not None:
        top, bottom, left, right = crop_box
        height, width = data.shape
        if not (0 <= top < bottom <= height and 0 <= left < right <= width):
            raise DataError(f"Degenerate crop box {crop_box} for image {data.shape}")
        data = data[top:bottom, left:right]
    target_h, target_w = target_shape
    if data.shape != (target_h, target_w):
        data = cv2.resize(data, (target_w, target_h), interpolation=cv2.INTER_LINEAR)
    return Tensor(np.ascontiguousarray(data)[None, None])


def fit_normalization(images: Iterable) -> Tuple[float, float]:
    """Mean and (population) standard deviation over every pixel of `images`."""
    pixels = [_as_2d(image).reshape(-1) for image in images]
    if not pixels:
        raise DataError("Normalization needs at least one image")
    values = np.concatenate(pixels)
    mu, sigma = float(values.mean()), float(values.std())
    if sigma == 0.0:
        raise DataError("Cannot normalize a constant dataset (sigma = 0)")
    return mu, sigma


def normalize(image: np.ndarray, stats: Tuple[float, float]) -> np.ndarray:
    mu, sigma = stats
    return (image - mu) / sigma


def prepare_image(image, target_shape: Tuple[int, int], stats: Tuple[float, float]) -> np.ndarray:
    """Single image to a normalized (1, 1, H, W) network input."""
    return normalize(preprocess(image, target_shape).data.astype(np.float64), stats)


def augment(image, rng: np.random.Generator) -> np.ndarray:
    """
    Independent 50% horizontal and vertical flips, then a rotation uniform in
    [-5, 5] degrees about the center with replicated borders.
    """
    data = _as_2d(image)
    if rng.random() < 0.5:
        data = data[:, ::-1]
    if rng.random() < 0.5:
        data = data[::-1, :]
    angle = rng.uniform(-MAX_ROTATION_DEG, MAX_ROTATION_DEG)
    data = np.ascontiguousarray(data)
    if angle != 0.0:
        height, width = data.shape
        matrix = cv2.getRotationMatrix2D(((width - 1) / 2.0, (height - 1) / 2.0), float(angle), 1.0)
        data = cv2.warpAffine(
            data, matrix, (width, height), flags=cv2.INTER_LINEAR, borderMode=cv2.BORDER_REPLICATE
        )
    return data
