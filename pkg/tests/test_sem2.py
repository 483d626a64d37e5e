import struct

import numpy as np
import pytest

from gridsplit.errors import FormatError, ShapeError
from gridsplit.sem2 import read_tensor, write_tensor


@pytest.mark.parametrize("shape", [(5,), (3, 4), (2, 3, 4), (2, 2, 3, 2)])
def test_round_trip(tmp_path, shape):
    rng = np.random.default_rng(0)
    data = rng.normal(size=shape).astype(np.float32)
    path = tmp_path / "t.sem2"
    write_tensor(path, data)
    back = read_tensor(path)
    assert back.dtype == np.float32
    assert back.shape == shape
    np.testing.assert_array_equal(back, data)


def test_float64_input_is_cast(tmp_path):
    path = tmp_path / "t.sem2"
    write_tensor(path, np.array([1.0, 2.5, -3.0]))
    np.testing.assert_array_equal(read_tensor(path), np.array([1.0, 2.5, -3.0], np.float32))


def test_header_layout(tmp_path):
    path = tmp_path / "t.sem2"
    write_tensor(path, np.arange(6, dtype=np.float32).reshape(2, 3))
    raw = path.read_bytes()
    assert raw[:4] == b"SEM2"
    assert raw[4] == 1  # version
    assert raw[5] == 2  # rank
    assert raw[6:8] == b"\x00\x00"
    assert struct.unpack_from("<2I", raw, 8) == (2, 3)
    assert len(raw) == 8 + 8 + 6 * 4


def test_rank_limits(tmp_path):
    # scalars promote to rank 1 on write; rank 5 is refused
    path = tmp_path / "s.sem2"
    write_tensor(path, np.float32(3.0))
    assert read_tensor(path).shape == (1,)
    with pytest.raises(ShapeError):
        write_tensor(tmp_path / "bad.sem2", np.zeros((1, 1, 1, 1, 1), np.float32))


def test_rejects_bad_magic(tmp_path):
    path = tmp_path / "t.sem2"
    write_tensor(path, np.zeros(3, np.float32))
    raw = bytearray(path.read_bytes())
    raw[:4] = b"NOPE"
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError):
        read_tensor(path)


def test_rejects_truncated_payload(tmp_path):
    path = tmp_path / "t.sem2"
    write_tensor(path, np.zeros((4, 4), np.float32))
    raw = path.read_bytes()
    path.write_bytes(raw[:-4])
    with pytest.raises(FormatError):
        read_tensor(path)
    path.write_bytes(raw[:6])
    with pytest.raises(FormatError):
        read_tensor(path)


def test_rejects_bad_version(tmp_path):
    path = tmp_path / "t.sem2"
    write_tensor(path, np.zeros(2, np.float32))
    raw = bytearray(path.read_bytes())
    raw[4] = 9
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError):
        read_tensor(path)
