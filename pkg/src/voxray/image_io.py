"""Image encoding and decoding: binary PPM (P6), PNG, and mask PNGs.

PPM output is written byte-exactly by hand so golden-image tests are stable
across library versions; PNG goes through Pillow with fixed settings.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import FormatError


def quantize_u8(pixels: np.ndarray) -> np.ndarray:
    """Map floats in [0, 1] to uint8 with round-half-up; values are clamped."""
    scaled = np.clip(pixels, 0.0, 1.0) * 255.0
    return np.floor(scaled + 0.5).astype(np.uint8)


def encode_ppm(rgb_u8: np.ndarray) -> bytes:
    if rgb_u8.ndim != 3 or rgb_u8.shape[2] != 3 or rgb_u8.dtype != np.uint8:
        raise FormatError(f"PPM encoder expects (h, w, 3) uint8, got {rgb_u8.shape}")
    h, w = rgb_u8.shape[:2]
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    return header + rgb_u8.tobytes()


def decode_ppm(data: bytes) -> np.ndarray:
    """Parse a binary P6 PPM back into an (h, w, 3) uint8 array."""
    if not data.startswith(b"P6"):
        raise FormatError("not a P6 PPM")
    # header: magic, width, height, maxval, single whitespace, then raster
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1
    w, h, maxval = fields
    if maxval != 255:
        raise FormatError(f"only maxval 255 supported, got {maxval}")
    raster = np.frombuffer(data, dtype=np.uint8, count=w * h * 3, offset=pos)
    return raster.reshape(h, w, 3).copy()


def encode_png(rgba_u8: np.ndarray) -> bytes:
    if rgba_u8.ndim != 3 or rgba_u8.shape[2] not in (3, 4):
        raise FormatError(f"PNG encoder expects (h, w, 3|4), got {rgba_u8.shape}")
    mode = "RGBA" if rgba_u8.shape[2] == 4 else "RGB"
    img = Image.fromarray(rgba_u8, mode=mode)
    buf = io.BytesIO()
    img.save(buf, format="PNG", optimize=False)
    return buf.getvalue()


def decode_png(data: bytes) -> np.ndarray:
    img = Image.open(io.BytesIO(data))
    return np.asarray(img)


def load_gray_png(path) -> np.ndarray:
    """Load an 8-bit grayscale PNG as floats in [0, 1].

    Color or paletted inputs are rejected rather than converted, so slice
    stacks and ground-truth masks stay unambiguous.
    """
    img = Image.open(path)
    if img.mode != "L":
        raise FormatError(
            f"{path}: expected 8-bit grayscale (mode L), got mode {img.mode}"
        )
    return np.asarray(img, dtype=np.float64) / 255.0


def save_gray_png(path, gray01: np.ndarray) -> None:
    Image.fromarray(quantize_u8(gray01), mode="L").save(path, format="PNG")


def load_mask_png(path) -> np.ndarray:
    """Load a 0/255 grayscale PNG as a boolean mask (nonzero = True)."""
    return load_gray_png(path) >= 0.5


def save_mask_png(path, mask: np.ndarray) -> None:
    Image.fromarray(np.where(mask, 255, 0).astype(np.uint8), mode="L").save(
        path, format="PNG"
    )


def save_image(frame, path) -> None:
    """Write a FrameImage as .ppm or .png, chosen by file extension."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".ppm":
        path.write_bytes(frame.to_ppm_bytes())
    elif suffix == ".png":
        path.write_bytes(frame.to_png_bytes())
    else:
        raise FormatError(f"unsupported image extension {suffix!r} (use .ppm or .png)")
