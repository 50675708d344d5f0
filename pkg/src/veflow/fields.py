"""Grid functions with physical and frequency representations.

Scalar, vector (3 components) and tensor (3x3 components) fields share one
storage convention: a real array of samples, or a complex array of Fourier
coefficients normalized so the k = 0 coefficient is the mean,

    u_hat(k) = N^-3 * sum_x u(x) exp(-i xi.x),
    u(x)     = sum_k u_hat(k) exp(+i xi.x).

With this pairing Parseval reads  ||u||_L2^2 = L^3 * sum_k |u_hat(k)|^2.
Fields are immutable after construction; frequency data of a real field is
Hermitian-symmetric.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .errors import FieldError, GridMismatchError
from .grid import Grid

PHYSICAL = "physical"
FREQUENCY = "frequency"

_RANK_SHAPE = {0: (), 1: (3,), 2: (3, 3)}


def _check_payload(grid: Grid, data: np.ndarray, rep: str, rank: int) -> np.ndarray:
    want = _RANK_SHAPE[rank] + grid.shape
    if data.shape != want:
        raise FieldError(f"expected shape {want}, got {data.shape}")
    if rep == PHYSICAL:
        data = np.ascontiguousarray(data, dtype=np.float64)
    elif rep == FREQUENCY:
        data = np.ascontiguousarray(data, dtype=np.complex128)
    else:
        raise FieldError(f"unknown representation {rep!r}")
    if not np.all(np.isfinite(data)):
        raise FieldError("field contains non-finite values")
    data.setflags(write=False)
    return data


def _fft(grid: Grid, samples: np.ndarray) -> np.ndarray:
    return np.fft.fftn(samples, axes=(-3, -2, -1)) / grid.n**3


def _ifft(grid: Grid, spectrum: np.ndarray) -> np.ndarray:
    out = np.fft.ifftn(spectrum, axes=(-3, -2, -1)) * grid.n**3
    scale = np.max(np.abs(out)) or 1.0
    worst = np.max(np.abs(out.imag))
    if worst > 1e-8 * scale:
        raise FieldError(
            f"inverse transform produced imaginary part {worst:.3e}; "
            "frequency data is not Hermitian-symmetric"
        )
    return out.real


def hermitian_defect(spectrum: np.ndarray) -> float:
    """Max |u_hat(k) - conj(u_hat(-k))| over the lattice."""
    flipped = spectrum
    for ax in (-3, -2, -1):
        flipped = np.flip(np.roll(flipped, -1, axis=ax), axis=ax)
    return float(np.max(np.abs(spectrum - np.conj(flipped))))


class _BaseField:
    rank = 0

    def __init__(self, grid: Grid, data: np.ndarray, rep: str = PHYSICAL):
        self.grid = grid
        self.rep = rep
        self.data = _check_payload(grid, np.asarray(data), rep, self.rank)

    # -- representations --------------------------------------------------

    @cached_property
    def spectrum(self) -> np.ndarray:
        """Fourier coefficients (read-only complex array)."""
        if self.rep == FREQUENCY:
            return self.data
        out = _fft(self.grid, self.data)
        out.setflags(write=False)
        return out

    @cached_property
    def samples(self) -> np.ndarray:
        """Physical samples (read-only real array)."""
        if self.rep == PHYSICAL:
            return self.data
        out = _ifft(self.grid, self.data)
        out.setflags(write=False)
        return out

    def to_physical(self):
        if self.rep == PHYSICAL:
            return self
        return type(self)(self.grid, self.samples, PHYSICAL)

    def to_frequency(self):
        if self.rep == FREQUENCY:
            return self
        return type(self)(self.grid, self.spectrum, FREQUENCY)

    # -- basic algebra -----------------------------------------------------

    def _binary(self, other, op):
        if not isinstance(other, type(self)):
            return NotImplemented
        if other.grid != self.grid:
            raise GridMismatchError("fields live on different grids")
        if other.rep != self.rep:
            other = other.to_physical() if self.rep == PHYSICAL else other.to_frequency()
        return type(self)(self.grid, op(self.data, other.data), self.rep)

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __neg__(self):
        return type(self)(self.grid, -self.data, self.rep)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return type(self)(self.grid, self.data * scalar, self.rep)

    __rmul__ = __mul__

    def __repr__(self):
        return (
            f"{type(self).__name__}(n={self.grid.n}, L={self.grid.length:g}, "
            f"rep={self.rep})"
        )


class ScalarField(_BaseField):
    """Real scalar grid function."""

    rank = 0

    @classmethod
    def from_physical(cls, grid: Grid, samples: np.ndarray) -> "ScalarField":
        return cls(grid, samples, PHYSICAL)

    @classmethod
    def from_frequency(cls, grid: Grid, spectrum: np.ndarray) -> "ScalarField":
        spectrum = np.asarray(spectrum, dtype=np.complex128)
        scale = float(np.max(np.abs(spectrum))) or 1.0
        defect = hermitian_defect(spectrum)
        if defect > 1e-10 * scale:
            raise FieldError(f"spectrum is not Hermitian-symmetric (defect {defect:.3e})")
        return cls(grid, spectrum, FREQUENCY)

    @classmethod
    def zero(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape), PHYSICAL)

    def mean(self) -> float:
        if self.rep == FREQUENCY:
            return float(self.data[0, 0, 0].real)
        return float(self.data.mean())


class VectorField(_BaseField):
    """Real 3-component grid function, stored as one (3, N, N, N) array."""

    rank = 1

    @classmethod
    def from_components(cls, components) -> "VectorField":
        comps = [c.to_physical() for c in components]
        grid = comps[0].grid
        if any(c.grid != grid for c in comps):
            raise GridMismatchError("components live on different grids")
        return cls(grid, np.stack([c.data for c in comps]), PHYSICAL)

    @classmethod
    def zero(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros((3,) + grid.shape), PHYSICAL)

    def component(self, i: int) -> ScalarField:
        return ScalarField(self.grid, self.data[i], self.rep)

    def means(self) -> np.ndarray:
        if self.rep == FREQUENCY:
            return self.data[:, 0, 0, 0].real.copy()
        return self.data.mean(axis=(1, 2, 3))


class TensorField(_BaseField):
    """Real 3x3-component grid function, stored as one (3, 3, N, N, N) array."""

    rank = 2

    @classmethod
    def zero(cls, grid: Grid) -> "TensorField":
        return cls(grid, np.zeros((3, 3) + grid.shape), PHYSICAL)

    @classmethod
    def identity(cls, grid: Grid) -> "TensorField":
        data = np.zeros((3, 3) + grid.shape)
        for i in range(3):
            data[i, i] = 1.0
        return cls(grid, data, PHYSICAL)

    def component(self, i: int, j: int) -> ScalarField:
        return ScalarField(self.grid, self.data[i, j], self.rep)

    def transpose(self) -> "TensorField":
        return TensorField(self.grid, np.swapaxes(self.data, 0, 1), self.rep)

    def antisymmetric_part(self) -> "TensorField":
        """T^T - T; exactly antisymmetric by construction."""
        return TensorField(self.grid, np.swapaxes(self.data, 0, 1) - self.data, self.rep)

    def trace(self) -> ScalarField:
        return ScalarField(self.grid, self.data[0, 0] + self.data[1, 1] + self.data[2, 2], self.rep)

    def dot(self, v: "VectorField") -> "VectorField":
        """Contraction over the second index, (T v)^i = T^{ij} v^j (physical)."""
        if v.grid != self.grid:
            raise GridMismatchError("operands live on different grids")
        out = np.einsum("ij...,j...->i...", self.samples, v.samples)
        return VectorField(self.grid, out, PHYSICAL)

    def means(self) -> np.ndarray:
        if self.rep == FREQUENCY:
            return self.data[:, :, 0, 0, 0].real.copy()
        return self.data.mean(axis=(2, 3, 4))


def transform(field, to: str):
    """Return ``field`` in the requested representation ("physical"/"frequency")."""
    if to == PHYSICAL:
        return field.to_physical()
    if to == FREQUENCY:
        return field.to_frequency()
    raise FieldError(f"unknown representation {to!r}")
