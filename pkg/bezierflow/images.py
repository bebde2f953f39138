"""
Grayscale images as scalar fields: PGM decoding and encoding, Gaussian
smoothing and gradient magnitude, and the edge-stopping function used by the
image energy. Coordinates are (x, y) = (column, row) with pixel centers at
integer positions and the origin at the top-left pixel.
"""
import math
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import ndimage

from bezierflow.errors import ArgumentError, FormatError

SIGMA_RANGE = (0.5, 10.0)
_WHITESPACE = b" \t\r\n\v\f"


class ScalarField:
    """
    A real-valued image, read-only values[row, column], bilinearly interpolated
    """

    values: NDArray[np.float64]

    def __init__(self, values: ArrayLike):
        array = np.array(values, dtype=float)
        if array.ndim != 2:
            raise ArgumentError(f"scalar field must be two-dimensional, got shape {array.shape}")
        if array.shape[0] < 2 or array.shape[1] < 2:
            raise ArgumentError(f"scalar field must be at least 2x2, got {array.shape[1]}x{array.shape[0]}")
        if not np.all(np.isfinite(array)):
            raise ArgumentError("scalar field values must be finite")
        array.setflags(write=False)
        self.values = array

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def contains(self, points: ArrayLike) -> NDArray[np.bool_]:
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        return ((points[:, 0] >= 0.0) & (points[:, 0] <= self.width - 1)
                & (points[:, 1] >= 0.0) & (points[:, 1] <= self.height - 1))

    def clamp(self, points: ArrayLike) -> NDArray[np.float64]:
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        return np.stack([np.clip(points[:, 0], 0.0, self.width - 1),
                         np.clip(points[:, 1], 0.0, self.height - 1)], axis=1)

    def sample(self, points: ArrayLike) -> NDArray[np.float64]:
        """
        Bilinear interpolation at (x, y) points; points outside are clamped to the border
        """
        points = self.clamp(points)
        return ndimage.map_coordinates(self.values, [points[:, 1], points[:, 0]], order=1, mode="nearest")

    def __repr__(self):
        return f"<ScalarField {self.width}x{self.height}>"


def _next_token(data: bytes, pos: int) -> Tuple[bytes, int, int]:
    """
    Skip whitespace and comments, then return (token, start, end)
    """
    size = len(data)
    while pos < size:
        if data[pos] in _WHITESPACE:
            pos += 1
        elif data[pos] == ord("#"):
            while pos < size and data[pos] not in b"\r\n":
                pos += 1
        else:
            break
    start = pos
    while pos < size and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
        pos += 1
    return data[start:pos], start, pos


def _header_int(data: bytes, pos: int, what: str) -> Tuple[int, int]:
    token, start, end = _next_token(data, pos)
    if not token:
        raise FormatError(f"missing {what} in PGM header", start)
    if not token.isdigit():
        raise FormatError(f"invalid {what} {token!r} in PGM header", start)
    return int(token), end


def load_pgm(data: bytes) -> ScalarField:
    """
    Decode an 8-bit P2 (ASCII) or P5 (binary) PGM image into a field with values in [0, 1]
    """
    data = bytes(data)
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"not a P2/P5 PGM image (magic {magic!r})", 0)
    width, pos = _header_int(data, 2, "width")
    height, pos = _header_int(data, pos, "height")
    maxval, pos = _header_int(data, pos, "maxval")
    if width < 2 or height < 2:
        raise FormatError(f"image must be at least 2x2, got {width}x{height}", 2)
    if not 0 < maxval <= 255:
        raise FormatError(f"unsupported maxval {maxval}, expected 1..255", pos)
    expected = width * height

    if magic == b"P5":
        if pos >= len(data) or data[pos] not in _WHITESPACE:
            raise FormatError("missing whitespace after PGM header", pos)
        start = pos + 1
        payload = data[start:start + expected]
        if len(payload) < expected:
            raise FormatError(f"truncated raster: expected {expected} bytes, received {len(payload)}",
                              start + len(payload))
        values = np.frombuffer(payload, dtype=np.uint8).astype(float)
        if np.any(values > maxval):
            offset = start + int(np.argmax(values > maxval))
            raise FormatError(f"sample above maxval {maxval}", offset)
    else:
        values = np.empty(expected)
        for k in range(expected):
            token, start, pos = _next_token(data, pos)
            if not token:
                raise FormatError(f"truncated raster: expected {expected} samples, received {k}", start)
            if not token.isdigit() or int(token) > maxval:
                raise FormatError(f"invalid sample {token!r} for maxval {maxval}", start)
            values[k] = int(token)

    return ScalarField(values.reshape(height, width) / maxval)


def write_pgm(field: ScalarField) -> bytes:
    """
    Encode a field as binary PGM, rescaling its value range to 0..255
    """
    values = field.values
    low, high = float(values.min()), float(values.max())
    if high > low:
        scaled = (values - low) / (high - low)
    else:
        scaled = np.clip(values, 0.0, 1.0)
    raster = np.round(scaled * 255.0).astype(np.uint8)
    header = f"P5\n{field.width} {field.height}\n255\n".encode("ascii")
    return header + raster.tobytes()


def check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not SIGMA_RANGE[0] <= sigma <= SIGMA_RANGE[1]:
        raise ArgumentError(f"sigma must lie in [{SIGMA_RANGE[0]}, {SIGMA_RANGE[1]}], got {sigma}")
    return sigma


def gaussian_gradient_magnitude(img: ScalarField, sigma: float) -> ScalarField:
    """
    |grad(G_sigma * I)|: separable Gaussian smoothing with radius ceil(3 sigma) and reflected
    borders, followed by central differences
    """
    sigma = check_sigma(sigma)
    radius = math.ceil(3.0 * sigma)
    smoothed = ndimage.gaussian_filter(img.values, sigma, mode="reflect", truncate=radius / sigma)
    rows, columns = np.gradient(smoothed)
    return ScalarField(np.hypot(columns, rows))


def edge_stopping_field(mag: ScalarField, contrast: float = 1.0) -> ScalarField:
    """
    g = 1 / (1 + (m / contrast)^2) where m is the magnitude normalized to a maximum of 1.
    g is 1 on flat regions and small on strong edges.
    """
    if not contrast > 0.0:
        raise ArgumentError(f"edge contrast must be positive, got {contrast}")
    peak = float(mag.values.max())
    if peak <= 0.0:
        return ScalarField(np.ones_like(mag.values))
    normalized = mag.values / peak
    return ScalarField(1.0 / (1.0 + (normalized / contrast) ** 2))
