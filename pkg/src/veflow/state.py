"""Physical and perturbation state containers and the change of variables.

A physical state (rho, u, F) near the constant equilibrium (1, 0, I) maps
to the perturbation triple

    n = rho - 1,   v = chi0 * u,   E = F - I,

with time rescaled by chi0^2 (grid points are relabelled, not resampled:
the box length is interpreted in the perturbation frame).  Perturbation
fields are projected to mean zero at construction because the inverse-order
multipliers are undefined at the zero mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FieldError, GridMismatchError, VacuumError
from .fields import FREQUENCY, ScalarField, TensorField, VectorField
from .grid import Grid
from .operators import project_mean_zero, sobolev_norm
from .params import ModelParams


@dataclass(frozen=True)
class FlowState:
    """Perturbation triple (n, v, E) at a given time, all components mean-zero."""

    n: ScalarField
    v: VectorField
    E: TensorField
    time: float = 0.0

    def __post_init__(self):
        if self.v.grid != self.n.grid or self.E.grid != self.n.grid:
            raise GridMismatchError("state components live on different grids")
        if float(self.n.samples.min()) <= -1.0:
            raise VacuumError("1 + n must stay positive", state=self)

    @classmethod
    def create(
        cls,
        n: ScalarField,
        v: VectorField,
        E: TensorField,
        time: float = 0.0,
        project: bool = True,
        warn: bool = True,
    ) -> "FlowState":
        if project:
            n = project_mean_zero(n, warn=warn, label="n")
            v = project_mean_zero(v, warn=warn, label="v")
            E = project_mean_zero(E, warn=warn, label="E")
        return cls(n, v, E, time)

    @classmethod
    def zero(cls, grid: Grid, time: float = 0.0) -> "FlowState":
        return cls(ScalarField.zero(grid), VectorField.zero(grid), TensorField.zero(grid), time)

    @property
    def grid(self) -> Grid:
        return self.n.grid

    def fields(self):
        return (self.n, self.v, self.E)

    def h_norm(self, k: int) -> float:
        """Sobolev norm of the full triple, (sum of squared component norms)^(1/2)."""
        return float(
            np.sqrt(sum(sobolev_norm(f, k) ** 2 for f in self.fields()))
        )


@dataclass(frozen=True)
class PhysState:
    """Physical variables (rho, u, F) on the grid."""

    rho: ScalarField
    u: VectorField
    F: TensorField
    time: float = 0.0

    def __post_init__(self):
        if self.u.grid != self.rho.grid or self.F.grid != self.rho.grid:
            raise GridMismatchError("state components live on different grids")
        if float(self.rho.samples.min()) <= 0.0:
            raise VacuumError("density must be positive everywhere", state=self)
        if float(det3(self.F.samples).min()) <= 0.0:
            raise FieldError("deformation gradient must have positive determinant")

    @property
    def grid(self) -> Grid:
        return self.rho.grid

    @classmethod
    def equilibrium(cls, grid: Grid) -> "PhysState":
        rho = ScalarField(grid, np.ones(grid.shape))
        return cls(rho, VectorField.zero(grid), TensorField.identity(grid))


def det3(t: np.ndarray) -> np.ndarray:
    """Pointwise determinant of a (3, 3, ...) array."""
    return (
        t[0, 0] * (t[1, 1] * t[2, 2] - t[1, 2] * t[2, 1])
        - t[0, 1] * (t[1, 0] * t[2, 2] - t[1, 2] * t[2, 0])
        + t[0, 2] * (t[1, 0] * t[2, 1] - t[1, 1] * t[2, 0])
    )


def adjugate3(t: np.ndarray) -> np.ndarray:
    """Pointwise adjugate of a (3, 3, ...) array, so inv = adj / det."""
    out = np.empty_like(t)
    out[0, 0] = t[1, 1] * t[2, 2] - t[1, 2] * t[2, 1]
    out[0, 1] = t[0, 2] * t[2, 1] - t[0, 1] * t[2, 2]
    out[0, 2] = t[0, 1] * t[1, 2] - t[0, 2] * t[1, 1]
    out[1, 0] = t[1, 2] * t[2, 0] - t[1, 0] * t[2, 2]
    out[1, 1] = t[0, 0] * t[2, 2] - t[0, 2] * t[2, 0]
    out[1, 2] = t[0, 2] * t[1, 0] - t[0, 0] * t[1, 2]
    out[2, 0] = t[1, 0] * t[2, 1] - t[1, 1] * t[2, 0]
    out[2, 1] = t[0, 1] * t[2, 0] - t[0, 0] * t[2, 1]
    out[2, 2] = t[0, 0] * t[1, 1] - t[0, 1] * t[1, 0]
    return out


def phys_to_pert(
    phys: PhysState, params: ModelParams, project: bool = True, warn: bool = True
) -> FlowState:
    """Change of variables (rho, u, F) -> (n, v, E) including the time rescaling."""
    grid = phys.grid
    n = ScalarField(grid, phys.rho.samples - 1.0)
    v = VectorField(grid, params.chi0 * phys.u.samples)
    E = TensorField(grid, phys.F.samples - TensorField.identity(grid).samples)
    return FlowState.create(n, v, E, time=phys.time / params.chi0**2, project=project, warn=warn)


def pert_to_phys(state: FlowState, params: ModelParams) -> PhysState:
    """Inverse change of variables."""
    grid = state.grid
    rho = ScalarField(grid, 1.0 + state.n.samples)
    u = VectorField(grid, state.v.samples / params.chi0)
    F = TensorField(grid, state.E.samples + TensorField.identity(grid).samples)
    return PhysState(rho, u, F, time=state.time * params.chi0**2)


def state_from_spectra(
    grid: Grid,
    n_hat: np.ndarray,
    v_hat: np.ndarray,
    e_hat: np.ndarray,
    time: float,
) -> FlowState:
    """Assemble a state from raw spectra, zeroing the mean modes silently."""
    n_hat = np.array(n_hat)
    v_hat = np.array(v_hat)
    e_hat = np.array(e_hat)
    n_hat[0, 0, 0] = 0.0
    v_hat[:, 0, 0, 0] = 0.0
    e_hat[:, :, 0, 0, 0] = 0.0
    n = ScalarField(grid, n_hat, FREQUENCY).to_physical()
    v = VectorField(grid, v_hat, FREQUENCY).to_physical()
    E = TensorField(grid, e_hat, FREQUENCY).to_physical()
    # the spectra are already known; seed the lazy caches
    for f, spec in ((n, n_hat), (v, v_hat), (E, e_hat)):
        spec.setflags(write=False)
        f.__dict__["spectrum"] = spec
    return FlowState(n, v, E, time)
