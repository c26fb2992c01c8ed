"""Flat binary field dumps.

Layout (little endian)::

    b"MPD1"            4-byte magic
    nx, ny, nz         uint32 each
    precision          uint32, 32 or 64 (bits per value)
    values             nx*ny*nz floats, x fastest, then y, then z

Every dump ``name.bin`` has a plain-text companion ``name.txt`` with one
``key = value`` line per entry (dimensions, precision and whatever the
caller adds, e.g. step and time).
"""
from __future__ import annotations

import os
import struct

import numpy as np

MAGIC = b"MPD1"
_HEADER = struct.Struct("<4s4I")
_DTYPES = {32: np.dtype("<f4"), 64: np.dtype("<f8")}


def metadata_path(path) -> str:
    root, _ = os.path.splitext(os.fspath(path))
    return root + ".txt"


def write_field_dump(field, path, **meta) -> str:
    """Write the interior of ``field`` (a Field3 or a 3-D array) to ``path``.

    Extra keyword arguments are recorded in the metadata file.  Returns
    the path of the metadata file.
    """
    values = np.asarray(field.interior if hasattr(field, "interior") else field)
    if values.ndim != 3:
        raise ValueError(f"expected a 3-D field, got shape {values.shape}")
    bits = values.dtype.itemsize * 8
    if values.dtype.kind != "f" or bits not in _DTYPES:
        raise ValueError(f"unsupported dtype {values.dtype}")
    nx, ny, nz = values.shape
    payload = values.astype(_DTYPES[bits]).ravel(order="F")   # x fastest
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, nx, ny, nz, bits))
        fh.write(payload.tobytes())
    info = {"format": "MPD1", "nx": nx, "ny": ny, "nz": nz, "precision": bits,
            "order": "x-fastest", "data": os.path.basename(os.fspath(path))}
    info.update(meta)
    mpath = metadata_path(path)
    with open(mpath, "w") as fh:
        for k, v in info.items():
            fh.write(f"{k} = {v!r}\n" if isinstance(v, float) else f"{k} = {v}\n")
    return mpath


def read_field_dump(path) -> np.ndarray:
    """Read a dump back as an ``(nx, ny, nz)`` array of its stored precision."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, nx, ny, nz, bits = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if bits not in _DTYPES:
            raise ValueError(f"{path}: unknown precision flag {bits}")
        count = nx * ny * nz
        data = np.frombuffer(fh.read(), dtype=_DTYPES[bits])
    if data.size != count:
        raise ValueError(f"{path}: expected {count} values, found {data.size}")
    return data.reshape((nx, ny, nz), order="F").astype(_DTYPES[bits].newbyteorder("="))


def read_metadata(path) -> dict:
    out = {}
    with open(metadata_path(path)) as fh:
        for line in fh:
            if "=" in line:
                k, v = line.split("=", 1)
                out[k.strip()] = v.strip()
    return out
