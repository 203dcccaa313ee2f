import struct

import numpy as np
import pytest

from trn.tensorio import (
    MAGIC,
    TensorFormatError,
    read_manifest,
    read_tensor,
    write_tensor,
)


class TestRoundtrip:
    def test_bitwise(self, tmp_path):
        rng = np.random.default_rng(0)
        for i in range(20):
            dims = tuple(int(rng.integers(1, 6)) for _ in range(int(rng.integers(1, 5))))
            data = rng.standard_normal(dims).astype(np.float32)
            path = tmp_path / f"{i}.trnt"
            write_tensor(data, path)
            back = read_tensor(path)
            assert back.shape == data.shape
            assert back.tobytes() == data.tobytes()

    def test_layout(self, tmp_path):
        path = tmp_path / "x.trnt"
        write_tensor(np.array([1.0, 2.5], dtype=np.float32), path)
        raw = path.read_bytes()
        assert raw[:4] == MAGIC
        assert struct.unpack_from("<III", raw, 4) == (1, 1, 2)
        assert struct.unpack_from("<2f", raw, 16) == (1.0, 2.5)


class TestValidation:
    def test_bad_magic_offset(self, tmp_path):
        path = tmp_path / "bad.trnt"
        path.write_bytes(b"XXXX" + b"\0" * 16)
        with pytest.raises(TensorFormatError) as err:
            read_tensor(path)
        assert err.value.offset == 0

    def test_truncation(self, tmp_path):
        path = tmp_path / "t.trnt"
        write_tensor(np.ones(8, dtype=np.float32), path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-4])
        with pytest.raises(TensorFormatError):
            read_tensor(path)


class TestBoundary:
    def test_reads_generated_dataset(self, toy_manifest):
        rows = read_manifest(toy_manifest)
        assert len(rows) == 2
        assert {r.split for r in rows} == {"train", "test"}
        for row in rows:
            seq = read_tensor(row.sequence_path)
            target = read_tensor(row.target_path)
            assert seq.shape == (6, 1, 32, 32)
            assert target.shape == (1, 32, 32)
            assert seq.dtype == np.float32
            assert np.all(seq >= 0.0) and np.all(seq <= 1.0)

    def test_malformed_manifest_line(self, tmp_path):
        bad = tmp_path / "manifest.tsv"
        bad.write_text("only_two\tfields\n")
        with pytest.raises(ValueError):
            read_manifest(bad)
