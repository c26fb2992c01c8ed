import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from mpdata import Field3, Grid3
from mpdata.io import MAGIC, metadata_path, read_field_dump, read_metadata, write_field_dump


def test_two_cell_payload(tmp_path):
    g = Grid3(2, 1, 1)
    f = Field3.from_interior(g, np.array([1.0, 2.0])[:, None, None])
    path = tmp_path / "f.bin"
    write_field_dump(f, path)
    raw = path.read_bytes()
    magic, nx, ny, nz, bits = struct.unpack("<4s4I", raw[:20])
    assert (magic, nx, ny, nz, bits) == (MAGIC, 2, 1, 1, 64)
    assert np.frombuffer(raw[20:], "<f8").tolist() == [1.0, 2.0]


def test_x_fastest(tmp_path):
    a = np.arange(24, dtype=np.float32).reshape(2, 3, 4)
    path = tmp_path / "a.bin"
    write_field_dump(a, path)
    vals = np.frombuffer(path.read_bytes()[20:], "<f4")
    assert vals[:3].tolist() == [a[0, 0, 0], a[1, 0, 0], a[0, 1, 0]]


@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_roundtrip_bitwise(tmp_path, dtype):
    a = np.random.default_rng(3).normal(size=(5, 4, 3)).astype(dtype)
    path = tmp_path / "r.bin"
    write_field_dump(a, path)
    b = read_field_dump(path)
    assert b.dtype == dtype
    assert a.tobytes() == b.tobytes()


@given(arrays(st.sampled_from([np.float32, np.float64]), st.tuples(*[st.integers(1, 4)] * 3)))
def test_roundtrip_property(tmp_path_factory, a):
    path = tmp_path_factory.mktemp("p") / "x.bin"
    write_field_dump(a, path)
    b = read_field_dump(path)
    assert b.shape == a.shape and a.tobytes() == b.tobytes()


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"XXXX" + struct.pack("<4I", 1, 1, 1, 64) + b"\0" * 8)
    with pytest.raises(ValueError, match="magic"):
        read_field_dump(path)


def test_truncated(tmp_path):
    path = tmp_path / "t.bin"
    write_field_dump(np.ones((2, 2, 2)), path)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError, match="expected 8"):
        read_field_dump(path)


def test_rejects_non_float(tmp_path):
    with pytest.raises(ValueError):
        write_field_dump(np.ones((2, 2, 2), dtype=np.int32), tmp_path / "i.bin")


def test_metadata(tmp_path):
    path = tmp_path / "m.bin"
    mpath = write_field_dump(np.ones((3, 2, 1)), path, step=7, time=0.25)
    assert mpath == metadata_path(path) == str(tmp_path / "m.txt")
    meta = read_metadata(path)
    assert meta["nx"] == "3" and meta["ny"] == "2" and meta["nz"] == "1"
    assert meta["precision"] == "64" and meta["step"] == "7" and meta["time"] == "0.25"
