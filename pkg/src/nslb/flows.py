"""Reference flows and initial data used by the solver tests and the CLI."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import PhysicalField, SpectralField, TorusGrid, dealias, hermitian_symmetrize, to_modes
from .leray import leray_project

__all__ = [
    "TaylorGreenFlow",
    "StreamFlow",
    "taylor_green",
    "perturbed_taylor_green",
    "random_divergence_free",
]


@dataclass(frozen=True)
class TaylorGreenFlow:
    """Closed-form decaying vortex pair on the unit 2-torus.

    v1 =  A e^{-8 pi^2 nu t} cos(2 pi x1) sin(2 pi x2)
    v2 = -A e^{-8 pi^2 nu t} sin(2 pi x1) cos(2 pi x2)
    p  = -(A e^{-8 pi^2 nu t})^2 / 4 * (cos(4 pi x1) + cos(4 pi x2))

    The advection term is an exact gradient, so the velocity evolves by pure
    diffusion and the L2 norm decays like exp(-8 pi^2 nu t).
    """

    nu: float
    amplitude: float = 1.0

    def decay(self, t):
        return np.exp(-8.0 * np.pi**2 * self.nu * t)

    def velocity(self, t, points):
        """Velocity at (m, 2) points; returns (2, m)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        a = self.amplitude * self.decay(t)
        x, y = pts[:, 0], pts[:, 1]
        return np.stack(
            [
                a * np.cos(2 * np.pi * x) * np.sin(2 * np.pi * y),
                -a * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y),
            ]
        )

    def pressure(self, t, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        a = self.amplitude * self.decay(t)
        return -(a**2) / 4.0 * (np.cos(4 * np.pi * pts[:, 0]) + np.cos(4 * np.pi * pts[:, 1]))

    def field(self, grid: TorusGrid, t=0.0) -> SpectralField:
        if grid.n != 2:
            raise ValueError("Taylor-Green flow is two-dimensional")
        x, y = grid.meshes()
        a = self.amplitude * self.decay(t)
        vals = np.stack(
            [
                a * np.cos(2 * np.pi * x) * np.sin(2 * np.pi * y),
                -a * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y),
            ]
        )
        return to_modes(PhysicalField(grid, vals))

    def l2_norm(self, t):
        # each component has mean square A^2/4, so |v|_L2 = A/sqrt(2)
        return self.amplitude * self.decay(t) / np.sqrt(2.0)


def taylor_green(grid: TorusGrid, amplitude=1.0, nu=0.0, t=0.0) -> SpectralField:
    return TaylorGreenFlow(nu=nu, amplitude=amplitude).field(grid, t)


@dataclass(frozen=True)
class StreamFlow:
    """Steady anisotropic solenoidal field from the stream function
    psi = sin(2 pi k1 x1) sin(2 pi k2 x2); v = (d psi/dx2, -d psi/dx1).

    Unlike the symmetric vortex pair, its odd finite-difference error terms
    do not cancel, so it gives sampled-divergence checks a genuine O(h^2)
    signal.
    """

    k1: int = 1
    k2: int = 2
    amplitude: float = 1.0

    def velocity(self, t, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        x, y = pts[:, 0], pts[:, 1]
        a = self.amplitude
        return np.stack(
            [
                a * 2 * np.pi * self.k2 * np.sin(2 * np.pi * self.k1 * x) * np.cos(2 * np.pi * self.k2 * y),
                -a * 2 * np.pi * self.k1 * np.cos(2 * np.pi * self.k1 * x) * np.sin(2 * np.pi * self.k2 * y),
            ]
        )


def perturbed_taylor_green(grid: TorusGrid, amplitude=1.0, eps=0.1) -> SpectralField:
    """Taylor-Green plus a cross-shell solenoidal mode.

    The pure vortex has a projection-null advection term; the added component
    (stream function sin(2 pi x1) sin(4 pi x2)) switches a genuine nonlinear
    interaction on while keeping the data divergence-free and smooth.
    """
    if grid.n != 2:
        raise ValueError("perturbed Taylor-Green is two-dimensional")
    x, y = grid.meshes()
    base = np.stack(
        [
            amplitude * np.cos(2 * np.pi * x) * np.sin(2 * np.pi * y),
            -amplitude * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y),
        ]
    )
    # u = (d psi / dx2, -d psi / dx1) with psi = sin(2 pi x1) sin(4 pi x2)
    pert = np.stack(
        [
            4 * np.pi * np.sin(2 * np.pi * x) * np.cos(4 * np.pi * y),
            -2 * np.pi * np.cos(2 * np.pi * x) * np.sin(4 * np.pi * y),
        ]
    ) / (4 * np.pi)
    return to_modes(PhysicalField(grid, base + eps * amplitude * pert))


def random_divergence_free(grid: TorusGrid, rng, kmax=None, rms=1.0) -> SpectralField:
    """Band-limited random solenoidal field with prescribed grid RMS."""
    if kmax is None:
        kmax = max(2, grid.N // 4)
    shape = (grid.n,) + grid.shape
    modes = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    band = np.ones(grid.shape, dtype=bool)
    for axis in range(grid.n):
        band &= np.abs(grid.alpha(axis)) <= kmax
    band &= grid.alpha_sq() > 0
    modes = modes * band
    modes = hermitian_symmetrize(modes, grid)
    field = dealias(leray_project(SpectralField(grid, modes)))
    norm = np.sqrt(np.sum(np.abs(field.modes) ** 2))
    if norm == 0:
        raise ValueError("degenerate random field")
    return SpectralField(grid, field.modes * (rms / norm))
