"""Constraint-exact initial data and radial profiles for decay experiments.

The deformation-side constraints are nonlinear in F, so admissible data is
built from a displacement instead of prescribed directly: with

    X(x) = x + phi(x),   A = grad X = I + grad phi,
    F0 = A^{-1},         rho0 = det A / <det A>,

the cofactor identity div(det(A) A^{-T}) = 0 and the gradient structure of
A make both constraints hold analytically; on the grid the residuals sit at
the spectral truncation floor.  Dividing det A by its box mean fixes the
total mass to the box volume, which keeps the constraints exact (they are
homogeneous in rho) and makes the density perturbation mean-free.

Displacements and velocities are given as finite Fourier mode lists; each
listed mode k contributes c exp(i k.x) plus its conjugate at -k, so fields
are real by construction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import InitialDataError
from .fields import FREQUENCY, ScalarField, TensorField, VectorField
from .grid import Grid
from .operators import sobolev_norm
from .params import ModelParams
from .quadrature import RadialProfile, gaussian_profile
from .state import PhysState, adjugate3, det3

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FourierMode:
    k: tuple[int, int, int]
    amplitude: tuple[complex, complex, complex]


@dataclass(frozen=True)
class DisplacementSpec:
    """Finite mode lists for the displacement phi and the velocity u."""

    phi_modes: tuple[FourierMode, ...]
    u_modes: tuple[FourierMode, ...] = ()
    scale: float = 1.0
    u_scale: float | None = None

    def scaled(self, scale: float, u_scale: float | None = None) -> "DisplacementSpec":
        return DisplacementSpec(self.phi_modes, self.u_modes, scale, u_scale)


def parse_mode_file(text: str) -> DisplacementSpec:
    """Parse the plain-text mode list format.

    Lines are ``phi k1 k2 k3 re1 im1 re2 im2 re3 im3`` or ``u ...``;
    blank lines and ``#`` comments are ignored.
    """
    phi, u = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] not in ("phi", "u") or len(parts) != 10:
            raise InitialDataError(
                f"mode file line {lineno}: expected 'phi|u k1 k2 k3 re1 im1 ... re3 im3'"
            )
        try:
            k = tuple(int(p) for p in parts[1:4])
            nums = [float(p) for p in parts[4:10]]
        except ValueError as exc:
            raise InitialDataError(f"mode file line {lineno}: {exc}") from None
        amp = tuple(complex(nums[2 * i], nums[2 * i + 1]) for i in range(3))
        mode = FourierMode(k, amp)
        (phi if parts[0] == "phi" else u).append(mode)
    if not phi and not u:
        raise InitialDataError("mode file declares no modes")
    return DisplacementSpec(tuple(phi), tuple(u))


def build_vector_field(grid: Grid, modes, scale: float = 1.0) -> VectorField:
    """Real vector field from a mode list; k and -k entries are conjugate pairs."""
    spec = np.zeros((3,) + grid.shape, dtype=np.complex128)
    half = grid.n // 2
    for mode in modes:
        if any(abs(k) > half - 1 for k in mode.k):
            raise InitialDataError(
                f"mode {mode.k} is not resolvable on an N = {grid.n} grid "
                f"(need |k| <= {half - 1})"
            )
        idx = tuple(k % grid.n for k in mode.k)
        conj_idx = tuple((-k) % grid.n for k in mode.k)
        for i in range(3):
            spec[(i,) + idx] += scale * mode.amplitude[i]
            spec[(i,) + conj_idx] += scale * np.conj(mode.amplitude[i])
    return VectorField(grid, spec, FREQUENCY).to_physical()


def piola_ic(spec: DisplacementSpec, grid: Grid, params: ModelParams) -> PhysState:
    """Constraint-compatible physical state from a displacement mode list."""
    phi = build_vector_field(grid, spec.phi_modes, spec.scale)
    u_scale = spec.scale if spec.u_scale is None else spec.u_scale
    u = build_vector_field(grid, spec.u_modes, u_scale)

    # A = I + grad phi with (grad phi)^{ij} = d_j phi^i
    xi = grid.xi
    gphi = np.fft.ifftn(
        1j * np.einsum("j...,i...->ij...", xi, phi.spectrum), axes=(-3, -2, -1)
    ).real * grid.n**3
    sup = float(np.sqrt((gphi**2).sum(axis=(0, 1))).max())
    if sup >= 1.0:
        raise InitialDataError(
            f"displacement too large: ||grad phi||_Linf = {sup:.4g} >= 1 "
            "(I + grad phi may be singular)"
        )
    A = gphi.copy()
    for i in range(3):
        A[i, i] += 1.0

    det = det3(A)
    if float(det.min()) <= 0.0:
        raise InitialDataError("det(I + grad phi) is not positive everywhere")
    F = adjugate3(A) / det
    rho = det / det.mean()

    state = PhysState(
        ScalarField(grid, rho), u, TensorField(grid, F), time=0.0
    )
    h2 = float(
        np.sqrt(
            sobolev_norm(ScalarField(grid, rho - 1.0), 2) ** 2
            + sobolev_norm(u, 2) ** 2
            + sobolev_norm(TensorField(grid, F - TensorField.identity(grid).samples), 2) ** 2
        )
    )
    logger.info("generated initial data with |(rho0-1, u0, F0-I)|_H2 = %.6e", h2)
    return state


def single_mode_spec(
    axis_wave: tuple[int, int, int] = (1, 0, 0),
    direction: int = 1,
    scale: float = 1.0,
    u_modes: tuple[FourierMode, ...] = (),
) -> DisplacementSpec:
    """Convenience builder: phi = scale * sin(k.x) e_direction."""
    amp = [0j, 0j, 0j]
    amp[direction] = -0.5j  # -i/2 at +k makes the pair sum to sin(k.x)
    return DisplacementSpec(
        (FourierMode(axis_wave, tuple(amp)),), u_modes, scale
    )


# ---------------------------------------------------------------------------
# radial spectral profiles for the whole-space experiments

def lowerbound_profiles(
    c0: float,
    eta: float | None = None,
    shape: str = "gaussian",
    width: float = 1.0,
) -> RadialProfile:
    """Profiles realizing the low-frequency lower-bound hypotheses.

    First slot: c0 * exp(-r^2/(2 width^2)), bounded below by c0/2 for
    r <= width.  Second slot: zero, or r^eta times the same envelope when
    ``eta`` is given.
    """
    if not c0 > 0.0:
        raise InitialDataError(f"lower-bound profile needs c0 > 0, got {c0}")
    if eta is not None and not eta > 0.0:
        raise InitialDataError(f"profile exponent must be positive, got {eta}")
    if shape != "gaussian":
        raise InitialDataError(f"unknown profile shape {shape!r}")
    return gaussian_profile(
        amp_first=c0,
        amp_second=0.0 if eta is None else 1.0,
        eta_second=0.0 if eta is None else eta,
        width=width,
        label=f"lowerbound(c0={c0:g}, eta={eta})",
    )


def eta_profile(eta: float, width: float = 1.0, slot: str = "second") -> RadialProfile:
    """|U0_hat| <= r^eta data: r^eta envelope in the chosen slot(s), nothing else."""
    if not eta > 0.0:
        raise InitialDataError(f"profile exponent must be positive, got {eta}")
    first = slot in ("first", "both")
    second = slot in ("second", "both")
    if not (first or second):
        raise InitialDataError(f"unknown slot {slot!r}")
    return gaussian_profile(
        amp_first=1.0 if first else 0.0,
        amp_second=1.0 if second else 0.0,
        eta_first=eta if first else 0.0,
        eta_second=eta if second else 0.0,
        width=width,
        label=f"eta(eta={eta:g}, slot={slot})",
    )
