import numpy as np
import pytest

from bfcs import io as bio
from bfcs.errors import InvalidInputError


def test_matrix_roundtrip(tmp_path, rng):
    X = rng.standard_normal((7, 3))
    bio.save_matrix(tmp_path / "x.bin", X)
    raw = (tmp_path / "x.bin").read_bytes()
    assert raw[:4] == b"BF64" and len(raw) == 20 + 7 * 3 * 8
    assert np.array_equal(bio.load_matrix(tmp_path / "x.bin"), X)


def test_measurement_roundtrip(tmp_path):
    Y = np.array([[1.0, -1.0], [-1.0, -1.0]])
    bio.save_measurements(tmp_path / "y.bin", Y)
    assert np.array_equal(bio.load_measurements(tmp_path / "y.bin"), Y)
    with pytest.raises(InvalidInputError):
        bio.load_matrix(tmp_path / "y.bin")
    with pytest.raises(InvalidInputError):
        bio.save_measurements(tmp_path / "z.bin", np.array([[0.0]]))


def test_truncated_file(tmp_path, rng):
    bio.save_matrix(tmp_path / "x.bin", rng.standard_normal((4, 4)))
    data = (tmp_path / "x.bin").read_bytes()
    (tmp_path / "x.bin").write_bytes(data[:-3])
    with pytest.raises(InvalidInputError):
        bio.load_matrix(tmp_path / "x.bin")


def test_csv_roundtrip_is_exact(tmp_path, rng):
    X = rng.standard_normal((5, 2)) * 1e-7
    bio.save_csv(tmp_path / "x.csv", X)
    assert np.array_equal(bio.load_csv(tmp_path / "x.csv"), X)


def test_pgm_scaling(tmp_path):
    X = np.array([[-1.0, 0.0], [1.0, 0.5]])
    lo, hi = bio.save_pgm(tmp_path / "x.pgm", X)
    assert (lo, hi) == (-1.0, 1.0)
    assert (tmp_path / "x.pgm").read_bytes().startswith(b"P5\n2 2\n255\n")
    assert bio.load_pgm(tmp_path / "x.pgm").tolist() == [[0, 128], [255, 191]]
    bio.save_pgm(tmp_path / "c.pgm", np.full((3, 2), 4.0))
    assert not bio.load_pgm(tmp_path / "c.pgm").any()
