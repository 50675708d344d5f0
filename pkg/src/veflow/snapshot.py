"""Binary field snapshots (format "CVF1").

Layout, little-endian throughout:

    bytes 0..3   magic "CVF1"
    u32          version (1)
    u32          N (points per axis)
    f64          L (box length)
    u8           rank: 0 scalar, 1 vector, 2 tensor
    u8           representation: 0 physical, 1 frequency
    payload      components in row-major order, each N^3 values;
                 f64 samples (physical) or interleaved f64 re/im pairs
                 (frequency)
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FieldError
from .fields import FREQUENCY, PHYSICAL, ScalarField, TensorField, VectorField
from .grid import Grid
from .state import FlowState, PhysState

MAGIC = b"CVF1"
VERSION = 1
_HEADER = struct.Struct("<4sIIdBB")
_RANK_TO_CLS = {0: ScalarField, 1: VectorField, 2: TensorField}
_CLS_TO_RANK = {ScalarField: 0, VectorField: 1, TensorField: 2}


def write_field(path, field) -> None:
    rank = _CLS_TO_RANK[type(field)]
    rep_code = 0 if field.rep == PHYSICAL else 1
    header = _HEADER.pack(MAGIC, VERSION, field.grid.n, field.grid.length, rank, rep_code)
    if field.rep == PHYSICAL:
        payload = np.ascontiguousarray(field.data, dtype="<f8").tobytes()
    else:
        inter = np.empty(field.data.shape + (2,), dtype="<f8")
        inter[..., 0] = field.data.real
        inter[..., 1] = field.data.imag
        payload = inter.tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_field(path, grid: Grid | None = None):
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FieldError(f"{path}: truncated header")
    magic, version, n, length, rank, rep_code = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FieldError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FieldError(f"{path}: unsupported version {version}")
    if rank not in _RANK_TO_CLS or rep_code not in (0, 1):
        raise FieldError(f"{path}: bad rank/representation ({rank}, {rep_code})")
    if grid is None:
        grid = Grid(n, length)
    elif grid.n != n or grid.length != length:
        raise FieldError(
            f"{path}: snapshot grid ({n}, {length:g}) does not match ({grid.n}, {grid.length:g})"
        )
    count = 3**rank * n**3
    cls = _RANK_TO_CLS[rank]
    shape = (3,) * rank + (n, n, n)
    if rep_code == 0:
        data = np.frombuffer(raw, dtype="<f8", count=count, offset=_HEADER.size)
        return cls(grid, data.reshape(shape).astype(np.float64), PHYSICAL)
    data = np.frombuffer(raw, dtype="<f8", count=2 * count, offset=_HEADER.size)
    data = data.reshape(shape + (2,))
    return cls(grid, (data[..., 0] + 1j * data[..., 1]).astype(np.complex128), FREQUENCY)


def write_state(directory, state: FlowState, prefix: str = "state") -> list[Path]:
    """Write the perturbation triple as three snapshot files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, f in zip(("n", "v", "E"), state.fields()):
        p = directory / f"{prefix}_{name}.cvf"
        write_field(p, f)
        paths.append(p)
    return paths


def read_state(directory, prefix: str = "state", time: float = 0.0) -> FlowState:
    directory = Path(directory)
    n = read_field(directory / f"{prefix}_n.cvf")
    v = read_field(directory / f"{prefix}_v.cvf", n.grid)
    E = read_field(directory / f"{prefix}_E.cvf", n.grid)
    return FlowState(n.to_physical(), v.to_physical(), E.to_physical(), time)


def write_phys(directory, phys: PhysState, prefix: str = "ic") -> list[Path]:
    """Write a physical state as rho / u / F snapshot files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, f in zip(("rho", "u", "F"), (phys.rho, phys.u, phys.F)):
        p = directory / f"{prefix}_{name}.cvf"
        write_field(p, f)
        paths.append(p)
    return paths


def read_phys(directory, prefix: str = "ic", time: float = 0.0) -> PhysState:
    directory = Path(directory)
    rho = read_field(directory / f"{prefix}_rho.cvf")
    u = read_field(directory / f"{prefix}_u.cvf", rho.grid)
    F = read_field(directory / f"{prefix}_F.cvf", rho.grid)
    return PhysState(rho.to_physical(), u.to_physical(), F.to_physical(), time)
