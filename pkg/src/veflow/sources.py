"""Nonlinear source terms and constraint residuals, pseudo-spectrally.

With the convention (grad v)^{ij} = d_j v^i the perturbation system reads

    n_t + div v                                   = f - v.grad n
    v_t - mu lap v - (lam+mu) grad div v
        + grad n - a div E                        = g
    E_t - grad v                                  = h - v.grad E

with  f = -n div v,  h = (grad v) E  and

    g^i = a E^{jk} d_j E^{ik}
        - n/(1+n) (mu lap v^i + (lam+mu) d_i div v)
        - v.grad v^i
        - (P'(1+n)/((1+n) P'(1)) - 1) d_i n.

Derivatives are spectral, products are formed pointwise in physical space,
and every quadratic output is cleaned with the spherical 2/3 rule.  The
1/(1+n) factors are evaluated pointwise (no series truncation); a vacuum
guard aborts when min(1+n) <= 0.5.

Auxiliary quantities for the reduced systems:

    g1 = g - a div(nE)                       (longitudinal forcing)
    S^{ij} = T^{ij} - T^{ji},                (shear forcing, antisymmetric)
    T^{ij} = d_k (E^{lk} d_l E^{ij} - E^{lj} d_l E^{ik}).

Constraint residuals, reported as L2 norms:

    r1 = ||d_j(rho F^{jk})||                 (momentum-compatible density)
    r2 = max_{ijk} ||F^{lk} d_l F^{ij} - F^{lj} d_l F^{ik}||
    r3 = ||d_i d_j (rho F^{ji})||            (second-order form of r1)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import ScalarField, TensorField, VectorField
from .grid import Grid
from .params import ModelParams, guard_positive_density, pressure_coefficient
from .state import FlowState, PhysState


@dataclass(frozen=True)
class SourceTriple:
    """Sources of the perturbation system plus the advection terms."""

    f: ScalarField
    g: VectorField
    h: TensorField
    adv_n: ScalarField      # v . grad n
    adv_E: TensorField      # v . grad E
    g1: VectorField | None = None
    S: TensorField | None = None


@dataclass(frozen=True)
class ConstraintReport:
    r1: float
    r2: float
    r3: float

    def max(self) -> float:
        return max(self.r1, self.r2, self.r3)


# ---------------------------------------------------------------------------
# spectral helpers on raw arrays

def _to_phys(grid: Grid, spec: np.ndarray) -> np.ndarray:
    return np.fft.ifftn(spec, axes=(-3, -2, -1)).real * grid.n**3


def _to_spec(grid: Grid, phys: np.ndarray) -> np.ndarray:
    return np.fft.fftn(phys, axes=(-3, -2, -1)) / grid.n**3


def _half_to_phys(grid: Grid, half_spec: np.ndarray) -> np.ndarray:
    """Inverse transform of the nonnegative-last-axis half spectrum."""
    return np.fft.irfftn(half_spec, s=grid.shape, axes=(-3, -2, -1)) * grid.n**3


def _dealias_phys(grid: Grid, phys: np.ndarray, enabled: bool = True) -> np.ndarray:
    if not enabled:
        return phys
    return _to_phys(grid, _to_spec(grid, phys) * grid.dealias_mask)


def _raw_products(state: FlowState, params: ModelParams):
    """Physical-space source products before any dealiasing.

    Returns (f, adv_n, g, h, adv_E) as raw arrays.
    """
    grid = state.grid
    n = state.n.samples
    guard_positive_density(1.0 + n, context="source evaluation")

    # derivatives through the half spectrum: the full lattice is Hermitian,
    # so slicing the cached spectra is free and irfftn recovers the samples
    half = grid.n // 2 + 1
    n_hat = state.n.spectrum[..., :half]
    v_hat = state.v.spectrum[..., :half]
    e_hat = state.E.spectrum[..., :half]
    v = state.v.samples
    E = state.E.samples

    xi = grid.xi[..., :half]
    # gradients: dv[l, i] = d_l v^i, dE[l, i, j] = d_l E^{ij}
    dn = _half_to_phys(grid, 1j * xi * n_hat[np.newaxis])
    dv = _half_to_phys(grid, 1j * np.einsum("l...,i...->li...", xi, v_hat))
    dE = _half_to_phys(grid, 1j * np.einsum("l...,ij...->lij...", xi, e_hat))
    divv = dv[0, 0] + dv[1, 1] + dv[2, 2]
    # mu lap v + (lam+mu) grad div v, spectrally: grad div v -> -xi (xi.v)
    xiv = np.einsum("j...,j...->...", xi, v_hat)
    visc_hat = -params.mu * (grid.xi_mag[..., :half] ** 2 * grid.nyquist_mask[..., :half]) * v_hat - (
        params.lam + params.mu
    ) * np.einsum("i...,...->i...", xi, xiv)
    visc = _half_to_phys(grid, visc_hat)

    f = -n * divv
    adv_n = np.einsum("j...,j...->...", v, dn)
    h = np.einsum("ki...,kj...->ij...", dv, E)
    adv_E = np.einsum("k...,kij...->ij...", v, dE)

    ratio = n / (1.0 + n)
    coef = pressure_coefficient(state.n, params).samples
    g = (
        params.a * np.einsum("jk...,jik...->i...", E, dE)
        - np.einsum("...,i...->i...", ratio, visc)
        - np.einsum("j...,ji...->i...", v, dv)
        - np.einsum("...,i...->i...", coef, dn)
    )
    return f, adv_n, g, h, adv_E


def evaluate_sources(
    state: FlowState,
    params: ModelParams,
    dealias: bool = True,
    with_derived: bool = False,
) -> SourceTriple:
    """All sources and advection terms of the system at the given state."""
    grid = state.grid
    f, adv_n, g, h, adv_E = _raw_products(state, params)
    triple = SourceTriple(
        f=ScalarField(grid, _dealias_phys(grid, f, dealias)),
        g=VectorField(grid, _dealias_phys(grid, g, dealias)),
        h=TensorField(grid, _dealias_phys(grid, h, dealias)),
        adv_n=ScalarField(grid, _dealias_phys(grid, adv_n, dealias)),
        adv_E=TensorField(grid, _dealias_phys(grid, adv_E, dealias)),
    )
    if with_derived:
        g1 = longitudinal_source(triple.g, state, params, dealias)
        s = shear_source(state, dealias)
        triple = SourceTriple(triple.f, triple.g, triple.h, triple.adv_n, triple.adv_E, g1, s)
    return triple


def rhs_spectra(state: FlowState, params: ModelParams, dealias: bool = True):
    """Dealiased spectra of the combined right-hand sides.

    Returns (G_n, G_v, G_E) = hats of (f - v.grad n, g, h - v.grad E).
    Equals the spectra of the :func:`evaluate_sources` fields combined, at
    half the transform cost; the time stepper uses this path.
    """
    grid = state.grid
    f, adv_n, g, h, adv_E = _raw_products(state, params)
    mask = grid.dealias_mask if dealias else 1.0
    g_n = _to_spec(grid, f - adv_n) * mask
    g_v = _to_spec(grid, g) * mask
    g_e = _to_spec(grid, h - adv_E) * mask
    return g_n, g_v, g_e


def longitudinal_source(
    g: VectorField, state: FlowState, params: ModelParams, dealias: bool = True
) -> VectorField:
    """g1 = g - a div(nE), the forcing of the reduced (n, div v) system."""
    grid = state.grid
    nE = _dealias_phys(grid, state.n.samples[np.newaxis, np.newaxis] * state.E.samples, dealias)
    nE_hat = _to_spec(grid, nE)
    div_nE = _to_phys(grid, np.einsum("j...,ij...->i...", 1j * grid.xi, nE_hat))
    return VectorField(grid, g.samples - params.a * div_nE)


def shear_source(state: FlowState, dealias: bool = True) -> TensorField:
    """Antisymmetric forcing S of the reduced (E^T - E, curl v) system."""
    grid = state.grid
    E = state.E.samples
    dE = _to_phys(grid, 1j * np.einsum("l...,ij...->lij...", grid.xi, state.E.spectrum))
    # inner[k, i, j] = E^{lk} d_l E^{ij} - E^{lj} d_l E^{ik}
    first = np.einsum("lk...,lij...->kij...", E, dE)
    second = np.einsum("lj...,lik...->kij...", E, dE)
    inner = _dealias_phys(grid, first - second, dealias)
    t_hat = np.einsum("k...,kij...->ij...", 1j * grid.xi, _to_spec(grid, inner))
    t = _to_phys(grid, t_hat)
    s = t - np.swapaxes(t, 0, 1)
    return TensorField(grid, s)


# ---------------------------------------------------------------------------
# constraint residuals

def _rho_f_of(obj) -> tuple[Grid, np.ndarray, np.ndarray]:
    if isinstance(obj, FlowState):
        grid = obj.grid
        rho = 1.0 + obj.n.samples
        F = obj.E.samples.copy()
        for i in range(3):
            F[i, i] = F[i, i] + 1.0
        return grid, rho, F
    if isinstance(obj, PhysState):
        return obj.grid, obj.rho.samples, obj.F.samples
    raise TypeError(f"expected FlowState or PhysState, got {type(obj).__name__}")


def constraint_residuals(obj) -> ConstraintReport:
    """Spectral L2 residuals of the two material constraints."""
    grid, rho, F = _rho_f_of(obj)
    vol = grid.volume
    xi = grid.xi

    rhoF_hat = _to_spec(grid, rho[np.newaxis, np.newaxis] * F)
    # r1: w^k = d_j (rho F^{jk})
    w_hat = np.einsum("j...,jk...->k...", 1j * xi, rhoF_hat)
    r1 = float(np.sqrt(vol * np.sum(np.abs(w_hat) ** 2)))

    # r3: d_k d_j (rho F^{jk}) = divdiv[(rho F)^T]
    q_hat = np.einsum("k...,k...->...", 1j * xi, w_hat)
    r3 = float(np.sqrt(vol * np.sum(np.abs(q_hat) ** 2)))

    # r2: max over slots of ||F^{lk} d_l F^{ij} - F^{lj} d_l F^{ik}||
    dF = _to_phys(grid, 1j * np.einsum("l...,ij...->lij...", xi, _to_spec(grid, F)))
    first = np.einsum("lk...,lij...->ijk...", F, dF)
    expr = first - np.swapaxes(first, 1, 2)
    norms = np.sqrt(vol * np.sum(np.abs(_to_spec(grid, expr)) ** 2, axis=(-3, -2, -1)))
    r2 = float(norms.max())
    return ConstraintReport(r1=r1, r2=r2, r3=r3)
