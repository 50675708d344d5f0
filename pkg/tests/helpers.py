"""Shared builders for the test suite."""

import numpy as np

from veflow import (
    DisplacementSpec,
    FlowState,
    FourierMode,
    Grid,
    ScalarField,
    TensorField,
    VectorField,
)


def smooth_spectrum(grid: Grid, rng, kmax: int, shape=()) -> np.ndarray:
    """Random Hermitian spectrum supported on |k| <= kmax, zero mean."""
    raw = rng.standard_normal(shape + grid.shape)
    spec = np.fft.fftn(raw, axes=(-3, -2, -1)) / grid.n**3
    k2 = (grid.wavenumbers**2).sum(axis=0)
    spec *= k2 <= kmax**2
    spec[(Ellipsis,) + (0, 0, 0)] = 0.0
    return spec


def smooth_scalar(grid: Grid, rng, kmax: int = None, amp: float = 1.0) -> ScalarField:
    kmax = kmax if kmax is not None else grid.n // 3
    return amp * ScalarField(grid, smooth_spectrum(grid, rng, kmax), "frequency").to_physical()


def smooth_vector(grid: Grid, rng, kmax: int = None, amp: float = 1.0) -> VectorField:
    kmax = kmax if kmax is not None else grid.n // 3
    return amp * VectorField(grid, smooth_spectrum(grid, rng, kmax, (3,)), "frequency").to_physical()


def smooth_tensor(grid: Grid, rng, kmax: int = None, amp: float = 1.0) -> TensorField:
    kmax = kmax if kmax is not None else grid.n // 3
    return amp * TensorField(grid, smooth_spectrum(grid, rng, kmax, (3, 3)), "frequency").to_physical()


def smooth_state(grid: Grid, rng, amp: float = 1e-2, kmax: int = 3) -> FlowState:
    """Random small mean-zero state, band-limited to |k| <= kmax."""
    return FlowState(
        smooth_scalar(grid, rng, kmax, amp),
        smooth_vector(grid, rng, kmax, amp),
        smooth_tensor(grid, rng, kmax, amp),
    )


def generic_piola_spec(scale: float) -> DisplacementSpec:
    """Multi-mode displacement plus velocity exciting every Hodge sector."""
    return DisplacementSpec(
        phi_modes=(
            FourierMode((1, 0, 0), (0.0, -0.5j, 0.25j)),
            FourierMode((0, 1, 0), (0.3 - 0.1j, 0.0, -0.2j)),
            FourierMode((1, 1, 0), (0.15j, -0.1, 0.05)),
            FourierMode((0, 1, 1), (0.1, 0.2j, -0.15)),
        ),
        u_modes=(
            FourierMode((1, 0, 0), (0.4 - 0.2j, 0.1j, 0.0)),
            FourierMode((0, 0, 1), (0.2, -0.3j, 0.1)),
            FourierMode((1, 0, 1), (0.0, 0.25, -0.1j)),
        ),
        scale=scale,
    )


def single_mode_state(grid: Grid, k, values: np.ndarray, scale: float = 1.0) -> FlowState:
    """State with one excited mode pair; values is the 13-vector (n, v, E-rows)."""
    nhat = np.zeros(grid.shape, complex)
    vhat = np.zeros((3,) + grid.shape, complex)
    ehat = np.zeros((3, 3) + grid.shape, complex)
    idx = tuple(int(kk) % grid.n for kk in k)
    cidx = tuple((-int(kk)) % grid.n for kk in k)
    u = np.asarray(values, dtype=complex) * scale
    nhat[idx] = u[0]
    nhat[cidx] = np.conj(u[0])
    for i in range(3):
        vhat[(i,) + idx] = u[1 + i]
        vhat[(i,) + cidx] = np.conj(u[1 + i])
        for j in range(3):
            ehat[(i, j) + idx] = u[4 + 3 * i + j]
            ehat[(i, j) + cidx] = np.conj(u[4 + 3 * i + j])
    return FlowState(
        ScalarField(grid, nhat, "frequency").to_physical(),
        VectorField(grid, vhat, "frequency").to_physical(),
        TensorField(grid, ehat, "frequency").to_physical(),
    )


def dense_linear_generator(xi: np.ndarray, params) -> np.ndarray:
    """Per-mode 13x13 generator of the linearized system, for expm oracles."""
    a = params.a
    L = np.zeros((13, 13), dtype=complex)

    def eidx(i, j):
        return 4 + 3 * i + j

    xi2 = float(np.dot(xi, xi))
    for j in range(3):
        L[0, 1 + j] = -1j * xi[j]
    for i in range(3):
        L[1 + i, 1 + i] += -params.mu * xi2
        for j in range(3):
            L[1 + i, 1 + j] += -(params.lam + params.mu) * xi[i] * xi[j]
        L[1 + i, 0] = -1j * xi[i]
        for j in range(3):
            L[1 + i, eidx(i, j)] = a * 1j * xi[j]
            L[eidx(i, j), 1 + i] = 1j * xi[j]
    return L
