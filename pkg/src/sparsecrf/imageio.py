"""File I/O for images, scribble masks, and segmentation masks.

8-bit grayscale/RGB sources (PNG, PGM/PPM) are normalized to [0, 1] on
load. Scribble PNGs use pure red (255,0,0) for foreground seeds and pure
blue (0,0,255) for background; any other color is unmarked. Output masks
are written as 0/255 grayscale PNG for viewer compatibility.
"""

import io

import numpy as np
from PIL import Image

from .field import BACKGROUND, FOREGROUND, ImageGrid, ScribbleMask, SegmentationMask


def load_image(path) -> ImageGrid:
    with Image.open(path) as im:
        return image_from_pil(im)


def image_from_bytes(data: bytes) -> ImageGrid:
    with Image.open(io.BytesIO(data)) as im:
        return image_from_pil(im)


def image_from_pil(im: Image.Image) -> ImageGrid:
    if im.mode in ("L", "I;16", "I"):
        arr = np.asarray(im.convert("L"), dtype=np.float64) / 255.0
        arr = arr[:, :, None]
    else:
        arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    return ImageGrid.from_array(arr)


def load_scribbles(path, width: int, height: int) -> ScribbleMask:
    """Decode a red/blue scribble PNG against the expected image size."""
    with Image.open(path) as im:
        rgb = np.asarray(im.convert("RGB"), dtype=np.uint8)
    if rgb.shape[:2] != (height, width):
        raise ValueError(
            f"scribble size {rgb.shape[1]}x{rgb.shape[0]} does not match "
            f"image {width}x{height}"
        )
    labels = np.zeros((height, width), dtype=np.uint8)
    red = (rgb[:, :, 0] == 255) & (rgb[:, :, 1] == 0) & (rgb[:, :, 2] == 0)
    blue = (rgb[:, :, 0] == 0) & (rgb[:, :, 1] == 0) & (rgb[:, :, 2] == 255)
    labels[red] = FOREGROUND
    labels[blue] = BACKGROUND
    return ScribbleMask(width, height, labels)


def save_mask_png(mask: SegmentationMask, path) -> None:
    Image.fromarray(mask.labels * np.uint8(255), mode="L").save(path, format="PNG")


def mask_png_bytes(mask: SegmentationMask) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(mask.labels * np.uint8(255), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def load_mask(path) -> np.ndarray:
    """Read a mask PNG back as a {0,1} uint8 array (threshold at 128)."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"), dtype=np.uint8)
    return (arr >= 128).astype(np.uint8)


def save_scribbles_png(scribbles: ScribbleMask, path) -> None:
    """Write scribbles in the red/blue convention (white = unmarked)."""
    rgb = np.full((scribbles.height, scribbles.width, 3), 255, dtype=np.uint8)
    rgb[scribbles.labels == FOREGROUND] = (255, 0, 0)
    rgb[scribbles.labels == BACKGROUND] = (0, 0, 255)
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")
