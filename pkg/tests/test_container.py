import numpy as np
import pytest

from ascprobe.container import file_sha256, load_container, save_container
from ascprobe.errors import CheckpointError


def sample_tensors():
    rng = np.random.default_rng(0)
    return {
        "a": rng.normal(size=(3, 4)),
        "b": np.arange(6, dtype=np.int64).reshape(2, 3),
        "c": rng.normal(size=5),
    }


def test_round_trip_bitwise(tmp_path):
    p = tmp_path / "t.bin"
    tensors = sample_tensors()
    save_container(p, "checkpoint", {"x": 1, "y": "z"}, tensors)
    config, loaded = load_container(p, expected_kind="checkpoint")
    assert config == {"x": 1, "y": "z"}
    assert set(loaded) == set(tensors)
    for k in tensors:
        assert loaded[k].dtype == tensors[k].dtype
        assert np.array_equal(loaded[k], tensors[k])
        assert loaded[k].flags.writeable


def test_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a.bin", tmp_path / "b.bin"
    save_container(a, "k", {"n": 2}, sample_tensors())
    save_container(b, "k", {"n": 2}, sample_tensors())
    assert file_sha256(a) == file_sha256(b)


def test_bad_magic(tmp_path):
    p = tmp_path / "bad.bin"
    p.write_bytes(b"NOTMAGIC" + b"\x00" * 32)
    with pytest.raises(CheckpointError, match="magic"):
        load_container(p)


def test_wrong_kind(tmp_path):
    p = tmp_path / "t.bin"
    save_container(p, "activations", {}, {"a": np.zeros(2)})
    with pytest.raises(CheckpointError, match="kind"):
        load_container(p, expected_kind="checkpoint")


def test_truncated_payload(tmp_path):
    p = tmp_path / "t.bin"
    save_container(p, "k", {}, {"a": np.zeros(10)})
    data = p.read_bytes()
    p.write_bytes(data[:-8])
    with pytest.raises(CheckpointError, match="truncated"):
        load_container(p)


def test_trailing_bytes_rejected(tmp_path):
    p = tmp_path / "t.bin"
    save_container(p, "k", {}, {"a": np.zeros(4)})
    p.write_bytes(p.read_bytes() + b"xx")
    with pytest.raises(CheckpointError, match="trailing"):
        load_container(p)


def test_version_check(tmp_path):
    import json
    import struct

    header = json.dumps({"kind": "k", "version": 99, "config": {}, "tensors": []}).encode()
    p = tmp_path / "t.bin"
    p.write_bytes(b"ASCPROBE" + struct.pack("<Q", len(header)) + header)
    with pytest.raises(CheckpointError, match="version"):
        load_container(p)
