"""Binary tensor and network-weight file formats.

These two formats are the interchange contract between this package and the
external trainer, so their byte layout is fixed and platform independent
(little-endian everywhere, no compression).

Tensor files (magic ``CTNS``)::

    magic    4 bytes  b"CTNS"
    version  u16      currently 1
    dtype    u8       0 = float32, 1 = complex64 (interleaved f32), 2 = uint8
    ndim     u8       >= 1
    shape    ndim x u64
    payload  row-major little-endian values

Weights files (magic ``CDWT``)::

    magic       4 bytes  b"CDWT"
    version     u16      currently 1
    header_len  u32
    header      UTF-8 JSON: {"layers": [{"name", "shape", "offset"}, ...]}
    blobs       concatenated float32 little-endian layer data

Layer offsets are byte positions relative to the start of the blob section
and must be contiguous and non-overlapping, in header order.
"""

from __future__ import annotations

import json
import struct
from collections.abc import Mapping
from pathlib import Path

import numpy as np

TENSOR_MAGIC = b"CTNS"
WEIGHTS_MAGIC = b"CDWT"
FORMAT_VERSION = 1

_DTYPE_CODES = {0: np.dtype("<f4"), 1: np.dtype("<c8"), 2: np.dtype("u1")}
_DTYPE_FOR_KIND = {"f": 0, "c": 1, "u": 2, "b": 2, "i": 2}


class TensorIOError(Exception):
    """Base class for malformed tensor/weights files."""


class BadMagicError(TensorIOError):
    pass


class VersionMismatchError(TensorIOError):
    pass


class TruncatedPayloadError(TensorIOError):
    pass


class PayloadSizeError(TensorIOError):
    """Payload length disagrees with the declared shape."""


class MissingLayerError(TensorIOError):
    pass


class LayerShapeError(TensorIOError):
    pass


class LayerOffsetError(TensorIOError):
    """Layer offsets overlap or leave gaps."""


class DuplicateLayerError(TensorIOError):
    pass


def _dtype_code(arr: np.ndarray) -> int:
    if arr.dtype == np.float32:
        return 0
    if arr.dtype == np.complex64:
        return 1
    if arr.dtype == np.uint8 or arr.dtype == np.bool_:
        return 2
    raise ValueError(f"unsupported tensor dtype: {arr.dtype}")


def write_tensor(path: str | Path, tensor: np.ndarray) -> None:
    """Write `tensor` to `path`. Supported dtypes: float32, complex64, uint8/bool."""
    arr = np.asarray(tensor)
    if arr.ndim < 1:  # ascontiguousarray would silently promote 0-d to (1,)
        raise ValueError("tensor must have at least one dimension")
    arr = np.ascontiguousarray(arr)
    if arr.dtype == np.bool_:
        arr = arr.astype(np.uint8)
    code = _dtype_code(arr)
    arr = arr.astype(_DTYPE_CODES[code], copy=False)
    with open(path, "wb") as fh:
        fh.write(TENSOR_MAGIC)
        fh.write(struct.pack("<HBB", FORMAT_VERSION, code, arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        fh.write(arr.tobytes("C"))


def read_tensor(path: str | Path) -> np.ndarray:
    """Read a tensor written by :func:`write_tensor`."""
    raw = Path(path).read_bytes()
    if raw[:4] != TENSOR_MAGIC:
        raise BadMagicError(f"{path}: expected magic {TENSOR_MAGIC!r}, got {raw[:4]!r}")
    if len(raw) < 8:
        raise TruncatedPayloadError(f"{path}: header truncated")
    version, code, ndim = struct.unpack_from("<HBB", raw, 4)
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"{path}: version {version}, expected {FORMAT_VERSION}")
    if code not in _DTYPE_CODES:
        raise TensorIOError(f"{path}: unknown dtype code {code}")
    if ndim < 1:
        raise TensorIOError(f"{path}: ndim must be >= 1")
    shape_end = 8 + 8 * ndim
    if len(raw) < shape_end:
        raise TruncatedPayloadError(f"{path}: shape table truncated")
    shape = struct.unpack_from(f"<{ndim}Q", raw, 8)
    dtype = _DTYPE_CODES[code]
    expected = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
    payload = raw[shape_end:]
    if len(payload) < expected:
        raise TruncatedPayloadError(f"{path}: payload has {len(payload)} bytes, need {expected}")
    if len(payload) != expected:
        raise PayloadSizeError(f"{path}: payload has {len(payload)} bytes, shape {shape} implies {expected}")
    return np.frombuffer(payload, dtype=dtype).reshape(shape).copy()


def save_weights(path: str | Path, weights: Mapping[str, np.ndarray]) -> None:
    """Write named float32 layers in mapping order with contiguous offsets."""
    layers = []
    blobs = []
    offset = 0
    for name, arr in weights.items():
        arr = np.ascontiguousarray(arr, dtype="<f4")
        layers.append({"name": name, "shape": list(arr.shape), "offset": offset})
        blobs.append(arr.tobytes("C"))
        offset += arr.nbytes
    header = json.dumps({"layers": layers}).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(WEIGHTS_MAGIC)
        fh.write(struct.pack("<HI", FORMAT_VERSION, len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def load_weights(path: str | Path, expected_shapes: Mapping[str, tuple] | None = None) -> dict[str, np.ndarray]:
    """Read a weights file, optionally validating against a layer table.

    With `expected_shapes`, every expected layer must be present with the
    expected shape and no extra layers are allowed; the offending layer is
    named in the error.
    """
    raw = Path(path).read_bytes()
    if raw[:4] != WEIGHTS_MAGIC:
        raise BadMagicError(f"{path}: expected magic {WEIGHTS_MAGIC!r}, got {raw[:4]!r}")
    if len(raw) < 10:
        raise TruncatedPayloadError(f"{path}: header truncated")
    version, header_len = struct.unpack_from("<HI", raw, 4)
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"{path}: version {version}, expected {FORMAT_VERSION}")
    if len(raw) < 10 + header_len:
        raise TruncatedPayloadError(f"{path}: JSON header truncated")
    header = json.loads(raw[10 : 10 + header_len].decode("utf-8"))
    blob = raw[10 + header_len :]

    weights: dict[str, np.ndarray] = {}
    cursor = 0
    for layer in header["layers"]:
        name = layer["name"]
        shape = tuple(int(s) for s in layer["shape"])
        offset = int(layer["offset"])
        nbytes = int(np.prod(shape, dtype=np.int64)) * 4
        if name in weights:
            raise DuplicateLayerError(f"{path}: layer {name!r} appears more than once")
        if offset != cursor:
            raise LayerOffsetError(f"{path}: layer {name!r} at offset {offset}, expected {cursor}")
        if offset + nbytes > len(blob):
            raise TruncatedPayloadError(f"{path}: layer {name!r} extends past end of file")
        weights[name] = np.frombuffer(blob, dtype="<f4", count=nbytes // 4, offset=offset).reshape(shape).copy()
        cursor = offset + nbytes
    if cursor != len(blob):
        raise PayloadSizeError(f"{path}: {len(blob) - cursor} trailing bytes after last layer")

    if expected_shapes is not None:
        for name, shape in expected_shapes.items():
            if name not in weights:
                raise MissingLayerError(f"{path}: required layer {name!r} is missing")
            if weights[name].shape != tuple(shape):
                raise LayerShapeError(
                    f"{path}: layer {name!r} has shape {weights[name].shape}, expected {tuple(shape)}"
                )
        extra = set(weights) - set(expected_shapes)
        if extra:
            raise LayerShapeError(f"{path}: unexpected layers {sorted(extra)}")
    return weights


def layer_checksums(weights: Mapping[str, np.ndarray]) -> dict[str, float]:
    """Per-layer sum of values, the cheap fingerprint used for round trips."""
    return {name: float(np.sum(arr, dtype=np.float64)) for name, arr in weights.items()}
