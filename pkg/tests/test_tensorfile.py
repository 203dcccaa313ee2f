import struct

import numpy as np
import pytest

from deturb.tensorfile import MAGIC, TensorFormatError, read_tensor, write_tensor


def layout_bytes(dims, payload):
    # Independent construction of the documented byte layout.
    blob = MAGIC + struct.pack("<I", 1) + struct.pack("<I", len(dims))
    for d in dims:
        blob += struct.pack("<I", d)
    for value in payload:
        blob += struct.pack("<f", value)
    return blob


class TestRoundtrip:
    def test_rank1_layout_and_roundtrip(self, tmp_path):
        path = tmp_path / "t.trnt"
        data = np.array([1.0, 2.5], dtype=np.float32)
        write_tensor(data, path)
        raw = path.read_bytes()
        assert raw == layout_bytes([2], [1.0, 2.5])
        assert len(raw) == 4 + 4 + 4 + 4 + 8
        back = read_tensor(path)
        assert back.dtype == np.float32
        np.testing.assert_array_equal(back, data)

    def test_rank4_zeros(self, tmp_path):
        path = tmp_path / "z.trnt"
        write_tensor(np.zeros((20, 1, 16, 16), dtype=np.float32), path)
        raw = path.read_bytes()
        assert raw[:4] == MAGIC
        assert struct.unpack_from("<4I", raw, 8) == (4, 20, 1, 16)
        assert set(raw[28:]) == {0}
        assert read_tensor(path).shape == (20, 1, 16, 16)

    def test_random_roundtrips_bitwise(self, tmp_path):
        rng = np.random.default_rng(1)
        for i in range(40):
            rank = int(rng.integers(1, 5))
            dims = tuple(int(rng.integers(1, 6)) for _ in range(rank))
            data = rng.standard_normal(dims).astype(np.float32)
            path = tmp_path / f"r{i}.trnt"
            write_tensor(data, path)
            back = read_tensor(path)
            assert back.shape == data.shape
            assert back.tobytes() == data.tobytes()

    def test_float64_input_is_cast(self, tmp_path):
        path = tmp_path / "c.trnt"
        write_tensor(np.array([0.1, 0.2]), path)
        back = read_tensor(path)
        np.testing.assert_array_equal(back, np.array([0.1, 0.2], dtype=np.float32))


class TestValidation:
    def test_rejects_nonfinite_payload_on_write(self, tmp_path):
        with pytest.raises(ValueError):
            write_tensor(np.array([1.0, np.inf], dtype=np.float32), tmp_path / "x.trnt")

    def test_corrupted_magic_names_offset_zero(self, tmp_path):
        path = tmp_path / "bad.trnt"
        blob = bytearray(layout_bytes([2], [0.0, 0.0]))
        blob[0:4] = b"XRNT"
        path.write_bytes(blob)
        with pytest.raises(TensorFormatError) as err:
            read_tensor(path)
        assert err.value.offset == 0

    def test_unknown_version_names_offset_four(self, tmp_path):
        path = tmp_path / "v.trnt"
        blob = bytearray(layout_bytes([1], [0.0]))
        blob[4:8] = struct.pack("<I", 9)
        path.write_bytes(blob)
        with pytest.raises(TensorFormatError) as err:
            read_tensor(path)
        assert err.value.offset == 4

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "t.trnt"
        blob = layout_bytes([4], [0.0, 0.0])  # header claims 4 floats, has 2
        path.write_bytes(blob)
        with pytest.raises(TensorFormatError) as err:
            read_tensor(path)
        assert err.value.offset == len(blob)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "h.trnt"
        path.write_bytes(MAGIC + struct.pack("<I", 1))
        with pytest.raises(TensorFormatError) as err:
            read_tensor(path)
        assert err.value.offset == 8

    def test_trailing_bytes(self, tmp_path):
        path = tmp_path / "x.trnt"
        path.write_bytes(layout_bytes([1], [1.0]) + b"JUNK")
        with pytest.raises(TensorFormatError) as err:
            read_tensor(path)
        assert err.value.offset == 4 + 4 + 4 + 4 + 4

    def test_nonfinite_payload_on_read(self, tmp_path):
        path = tmp_path / "n.trnt"
        path.write_bytes(layout_bytes([3], [1.0, float("nan"), 2.0]))
        with pytest.raises(TensorFormatError) as err:
            read_tensor(path)
        assert err.value.offset == 16 + 4  # header end + one float

    def test_write_is_atomic(self, tmp_path):
        path = tmp_path / "a.trnt"
        write_tensor(np.ones(3, dtype=np.float32), path)
        write_tensor(np.ones(4, dtype=np.float32), path)
        assert read_tensor(path).shape == (4,)
        assert list(tmp_path.iterdir()) == [path]
