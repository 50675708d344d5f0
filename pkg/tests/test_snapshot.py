"""Binary snapshot format: header layout, endianness, round trips."""

import struct

import numpy as np
import pytest

from helpers import smooth_scalar, smooth_state, smooth_tensor, smooth_vector
from veflow import FieldError, Grid, ScalarField, TensorField
from veflow.snapshot import (
    read_field,
    read_phys,
    read_state,
    write_field,
    write_phys,
    write_state,
)
from veflow.state import pert_to_phys
from veflow import make_params


class TestFieldRoundTrips:
    def test_scalar_physical(self, tmp_path, grid8, rng):
        f = smooth_scalar(grid8, rng)
        p = tmp_path / "s.cvf"
        write_field(p, f)
        back = read_field(p)
        assert back.rep == "physical"
        assert np.array_equal(back.samples, f.samples)

    def test_vector_frequency(self, tmp_path, grid8, rng):
        f = smooth_vector(grid8, rng).to_frequency()
        p = tmp_path / "v.cvf"
        write_field(p, f)
        back = read_field(p, grid8)
        assert back.rep == "frequency"
        assert np.array_equal(back.data, f.data)

    def test_tensor_physical(self, tmp_path, grid8, rng):
        f = smooth_tensor(grid8, rng)
        p = tmp_path / "t.cvf"
        write_field(p, f)
        back = read_field(p)
        assert isinstance(back, TensorField)
        assert np.array_equal(back.samples, f.samples)


class TestHeader:
    def test_layout(self, tmp_path):
        g = Grid(8, 3.5)
        f = ScalarField(g, np.zeros(g.shape))
        p = tmp_path / "h.cvf"
        write_field(p, f)
        raw = p.read_bytes()
        magic, version, n, length, rank, rep = struct.unpack_from("<4sIIdBB", raw)
        assert magic == b"CVF1"
        assert version == 1
        assert n == 8
        assert length == 3.5
        assert rank == 0 and rep == 0
        assert len(raw) == struct.calcsize("<4sIIdBB") + 8 * 8**3

    def test_payload_little_endian(self, tmp_path):
        g = Grid(4, 1.0)
        data = np.zeros(g.shape)
        data[0, 0, 0] = 1.0
        write_field(tmp_path / "le.cvf", ScalarField(g, data))
        raw = (tmp_path / "le.cvf").read_bytes()
        first = struct.unpack_from("<d", raw, struct.calcsize("<4sIIdBB"))[0]
        assert first == 1.0

    def test_bad_magic_rejected(self, tmp_path):
        p = tmp_path / "bad.cvf"
        p.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(FieldError, match="magic"):
            read_field(p)

    def test_grid_mismatch_rejected(self, tmp_path, grid8, grid16, rng):
        f = smooth_scalar(grid8, rng)
        p = tmp_path / "g.cvf"
        write_field(p, f)
        with pytest.raises(FieldError, match="grid"):
            read_field(p, grid16)

    def test_truncated_rejected(self, tmp_path):
        p = tmp_path / "t.cvf"
        p.write_bytes(b"CV")
        with pytest.raises(FieldError):
            read_field(p)


class TestStateSnapshots:
    def test_state_round_trip(self, tmp_path, grid8, rng):
        st = smooth_state(grid8, rng, amp=1e-2)
        write_state(tmp_path, st)
        back = read_state(tmp_path)
        for f0, f1 in zip(st.fields(), back.fields()):
            assert np.array_equal(f0.samples, f1.samples)

    def test_phys_round_trip(self, tmp_path, grid8, rng):
        params = make_params()
        phys = pert_to_phys(smooth_state(grid8, rng, amp=1e-2), params)
        write_phys(tmp_path, phys)
        back = read_phys(tmp_path)
        assert np.array_equal(back.rho.samples, phys.rho.samples)
        assert np.array_equal(back.F.samples, phys.F.samples)
