"""Readers and writers for the two binary interchange formats.

These are reimplemented here rather than imported from the consumer package
on purpose: the bytes on disk are the contract, and two independent
implementations keep each other honest.

Tensor files start with the magic ``CTNS`` followed by a little-endian u16
version (1), a u8 dtype code (0 float32, 1 complex64, 2 uint8), a u8 ndim,
``ndim`` u64 dimensions, and the raw row-major payload.

Weights files start with the magic ``CDWT`` followed by a u16 version (1), a
u32 header length, a UTF-8 JSON header ``{"layers": [{"name", "shape",
"offset"}, ...]}``, and contiguous float32 blobs in header order; offsets are
relative to the end of the header.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

TENSOR_MAGIC = b"CTNS"
WEIGHTS_MAGIC = b"CDWT"
VERSION = 1

_CODE_TO_DTYPE = {0: np.dtype("<f4"), 1: np.dtype("<c8"), 2: np.dtype("u1")}
_NAME_TO_CODE = {"float32": 0, "complex64": 1, "uint8": 2}


class FormatError(RuntimeError):
    """Malformed or mismatched interchange file."""


def write_tensor(path: str | Path, arr: np.ndarray) -> None:
    arr = np.asarray(arr)
    if arr.dtype == np.bool_:
        arr = arr.astype(np.uint8)
    code = _NAME_TO_CODE.get(arr.dtype.name)
    if code is None:
        raise FormatError(f"unsupported dtype {arr.dtype}; store float32/complex64/uint8")
    if arr.ndim < 1:
        raise FormatError("tensors must have at least one dimension")
    arr = np.ascontiguousarray(arr.astype(_CODE_TO_DTYPE[code], copy=False))
    header = TENSOR_MAGIC + struct.pack("<HBB", VERSION, code, arr.ndim)
    header += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    Path(path).write_bytes(header + arr.tobytes("C"))


def read_tensor(path: str | Path) -> np.ndarray:
    blob = Path(path).read_bytes()
    if blob[:4] != TENSOR_MAGIC:
        raise FormatError(f"{path}: not a tensor file (magic {blob[:4]!r})")
    version, code, ndim = struct.unpack_from("<HBB", blob, 4)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if code not in _CODE_TO_DTYPE or ndim < 1:
        raise FormatError(f"{path}: bad dtype code {code} or ndim {ndim}")
    shape = struct.unpack_from(f"<{ndim}Q", blob, 8)
    dtype = _CODE_TO_DTYPE[code]
    start = 8 + 8 * ndim
    expected = int(np.prod(shape)) * dtype.itemsize
    payload = blob[start:]
    if len(payload) != expected:
        raise FormatError(f"{path}: payload is {len(payload)} bytes, shape needs {expected}")
    return np.frombuffer(payload, dtype=dtype).reshape(shape).copy()


def save_weights(path: str | Path, layers: dict[str, np.ndarray]) -> None:
    """Write named float32 layers, preserving dict order."""
    entries = []
    blobs = []
    offset = 0
    for name, arr in layers.items():
        arr = np.ascontiguousarray(np.asarray(arr, dtype=np.float32))
        entries.append({"name": name, "shape": list(arr.shape), "offset": offset})
        blobs.append(arr.tobytes("C"))
        offset += len(blobs[-1])
    header = json.dumps({"layers": entries}).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(WEIGHTS_MAGIC)
        fh.write(struct.pack("<HI", VERSION, len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def load_weights(path: str | Path) -> dict[str, np.ndarray]:
    blob = Path(path).read_bytes()
    if blob[:4] != WEIGHTS_MAGIC:
        raise FormatError(f"{path}: not a weights file (magic {blob[:4]!r})")
    version, header_len = struct.unpack_from("<HI", blob, 4)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    header = json.loads(blob[10 : 10 + header_len].decode("utf-8"))
    base = 10 + header_len
    out: dict[str, np.ndarray] = {}
    for entry in header["layers"]:
        name, shape, offset = entry["name"], tuple(entry["shape"]), entry["offset"]
        if name in out:
            raise FormatError(f"{path}: duplicate layer {name!r}")
        n = int(np.prod(shape)) * 4
        chunk = blob[base + offset : base + offset + n]
        if len(chunk) != n:
            raise FormatError(f"{path}: layer {name!r} truncated")
        out[name] = np.frombuffer(chunk, dtype="<f4").reshape(shape).copy()
    return out


def checksums(layers: dict[str, np.ndarray]) -> dict[str, float]:
    """Per-layer float64 value sums, the fingerprint shared across packages."""
    return {name: float(np.sum(arr, dtype=np.float64)) for name, arr in layers.items()}
