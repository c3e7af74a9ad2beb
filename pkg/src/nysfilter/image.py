"""Planar image containers, range-list extraction, and image file I/O.

Images are stored channel-planar as float64 arrays of shape
(channels, height, width): all of channel 0, then channel 1, and so on,
row-major within a channel. All internal arithmetic is double precision
regardless of the on-disk sample type.

Supported file formats:

* 8-bit PNG (grayscale or RGB, no alpha),
* binary PGM/PPM (``P5``/``P6``, maxval 255),
* a raw float cube for hyperspectral data: magic bytes ``KFC1``, then
  little-endian uint32 width, height, bands, then a uint32 flag
  (0 = float32 samples, 1 = float64), then planar band-sequential
  samples, row-major within a band.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

CUBE_MAGIC = b"KFC1"


class ImageFormatError(ValueError):
    """Raised for unreadable, unsupported, or inconsistent image files."""


@dataclass(frozen=True)
class Image:
    """Immutable planar raster. ``data[c, y, x]`` is sample (c, x, y)."""

    data: np.ndarray
    range_max: float = 255.0

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[np.newaxis, :, :]
        if arr.ndim != 3 or arr.size == 0:
            raise ValueError("image data must be a non-empty (channels, height, width) array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image samples must be finite")
        if not self.range_max > 0:
            raise ValueError("range_max must be positive")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def samples(self) -> np.ndarray:
        """Flat planar sample vector: samples[c*w*h + y*w + x] = data[c, y, x]."""
        return self.data.reshape(-1)

    def plane(self, c: int) -> np.ndarray:
        return self.data[c]


@dataclass(frozen=True)
class RangeList:
    """All guide vectors in pixel order, plus the pixel -> row index map.

    The list is not deduplicated: row k holds the guide vector of the pixel
    with linear index k, and ``index_map`` is the identity ``arange(m)``
    (0-based linear pixel indices).
    """

    vectors: np.ndarray   # (m, dim) float64
    index_map: np.ndarray  # (m,) int64

    def __post_init__(self) -> None:
        vec = np.ascontiguousarray(np.asarray(self.vectors, dtype=np.float64))
        idx = np.ascontiguousarray(np.asarray(self.index_map, dtype=np.int64))
        if vec.ndim != 2 or vec.shape[0] == 0:
            raise ValueError("range list must be a non-empty (m, dim) matrix")
        if idx.shape != (vec.shape[0],):
            raise ValueError("index map length must equal the number of vectors")
        vec.flags.writeable = False
        idx.flags.writeable = False
        object.__setattr__(self, "vectors", vec)
        object.__setattr__(self, "index_map", idx)

    @property
    def m(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def extract_range_list(guide: Image) -> RangeList:
    """List every guide vector (duplicates kept) in linear pixel order."""
    m = guide.width * guide.height
    vectors = guide.data.reshape(guide.channels, m).T.copy()
    return RangeList(vectors=vectors, index_map=np.arange(m, dtype=np.int64))


def quantize_u8(samples: np.ndarray) -> np.ndarray:
    """Clamp to [0, 255], then round half away from zero."""
    return np.floor(np.clip(samples, 0.0, 255.0) + 0.5).astype(np.uint8)


def load_image(path: str | Path) -> Image:
    """Load a PNG, binary PGM/PPM, or ``KFC1`` float cube.

    8-bit sources yield ``range_max`` 255; cubes default to 255 as well
    (override on the resulting Image if the data uses another range).
    """
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head[:4] == CUBE_MAGIC:
        return _load_cube(path)
    if head[:2] in (b"P5", b"P6"):
        return _load_pnm(path)
    return _load_png(path)


def save_image(img: Image, path: str | Path, cube_dtype: str = "float64") -> None:
    """Write ``img`` to ``path``; the format is chosen by file suffix.

    ``.png``/``.pgm``/``.ppm`` are 8-bit: samples are clamped to [0, 255]
    and rounded half away from zero. ``.kfc`` writes the raw float cube
    (``cube_dtype`` selects float32 or float64 samples) with no rounding.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".kfc":
        _save_cube(img, path, cube_dtype)
    elif suffix == ".png":
        _save_png(img, path)
    elif suffix in (".pgm", ".ppm"):
        _save_pnm(img, path)
    else:
        raise ImageFormatError(f"unsupported output format: {path.name!r}")


def _load_png(path: Path) -> Image:
    from PIL import Image as PILImage
    from PIL import UnidentifiedImageError

    try:
        with PILImage.open(path) as im:
            if im.mode == "P":
                im = im.convert("RGB")
            if im.mode not in ("L", "RGB"):
                raise ImageFormatError(
                    f"unsupported image mode {im.mode!r} in {path.name} "
                    "(8-bit grayscale or RGB required)"
                )
            arr = np.asarray(im, dtype=np.float64)
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"unreadable image file: {path}") from exc
    if arr.ndim == 2:
        data = arr[np.newaxis, :, :]
    else:
        data = np.moveaxis(arr, 2, 0)
    return Image(data=data, range_max=255.0)


def _save_png(img: Image, path: Path) -> None:
    from PIL import Image as PILImage

    q = quantize_u8(img.data)
    if img.channels == 1:
        pil = PILImage.fromarray(q[0], mode="L")
    elif img.channels == 3:
        pil = PILImage.fromarray(np.moveaxis(q, 0, 2), mode="RGB")
    else:
        raise ImageFormatError(f"cannot write {img.channels}-channel image as PNG")
    pil.save(path, format="PNG")


def _load_pnm(path: Path) -> Image:
    raw = path.read_bytes()
    magic, fields, offset = raw[:2], [], 2
    # header: width, height, maxval separated by whitespace; '#' starts a comment
    while len(fields) < 3:
        if offset >= len(raw):
            raise ImageFormatError(f"truncated PNM header in {path.name}")
        ch = raw[offset:offset + 1]
        if ch == b"#":
            offset = raw.index(b"\n", offset) + 1
        elif ch.isspace():
            offset += 1
        else:
            end = offset
            while end < len(raw) and not raw[end:end + 1].isspace():
                end += 1
            fields.append(int(raw[offset:end]))
            offset = end
    offset += 1  # single whitespace after maxval
    width, height, maxval = fields
    if maxval != 255:
        raise ImageFormatError(f"unsupported bit depth in {path.name}: maxval {maxval}")
    channels = 1 if magic == b"P5" else 3
    expected = width * height * channels
    payload = np.frombuffer(raw, dtype=np.uint8, count=-1, offset=offset)
    if payload.size != expected:
        raise ImageFormatError(
            f"size mismatch in {path.name}: header implies {expected} samples, "
            f"found {payload.size}"
        )
    if channels == 1:
        data = payload.reshape(1, height, width)
    else:
        data = np.moveaxis(payload.reshape(height, width, 3), 2, 0)
    return Image(data=data.astype(np.float64), range_max=255.0)


def _save_pnm(img: Image, path: Path) -> None:
    if path.suffix.lower() == ".pgm":
        if img.channels != 1:
            raise ImageFormatError("PGM requires a single-channel image")
        magic = b"P5"
        payload = quantize_u8(img.data)[0]
    else:
        if img.channels != 3:
            raise ImageFormatError("PPM requires a 3-channel image")
        magic = b"P6"
        payload = np.moveaxis(quantize_u8(img.data), 0, 2)
    header = magic + f"\n{img.width} {img.height}\n255\n".encode("ascii")
    path.write_bytes(header + payload.tobytes())


def _load_cube(path: Path) -> Image:
    raw = path.read_bytes()
    if len(raw) < 20:
        raise ImageFormatError(f"truncated cube header in {path.name}")
    width, height, bands, flag = struct.unpack_from("<4I", raw, 4)
    if flag not in (0, 1):
        raise ImageFormatError(f"unknown cube sample-type flag {flag} in {path.name}")
    dtype = np.dtype("<f4") if flag == 0 else np.dtype("<f8")
    expected = width * height * bands
    payload = np.frombuffer(raw, dtype=dtype, offset=20)
    if payload.size != expected:
        raise ImageFormatError(
            f"size mismatch in {path.name}: header implies {expected} samples, "
            f"found {payload.size}"
        )
    data = payload.astype(np.float64).reshape(bands, height, width)
    return Image(data=data, range_max=255.0)


def _save_cube(img: Image, path: Path, cube_dtype: str) -> None:
    if cube_dtype == "float32":
        flag, dtype = 0, np.dtype("<f4")
    elif cube_dtype == "float64":
        flag, dtype = 1, np.dtype("<f8")
    else:
        raise ValueError(f"cube_dtype must be 'float32' or 'float64', got {cube_dtype!r}")
    header = CUBE_MAGIC + struct.pack("<4I", img.width, img.height, img.channels, flag)
    path.write_bytes(header + img.data.astype(dtype).tobytes())
