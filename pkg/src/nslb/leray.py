"""Pressure elimination on the torus: Fourier-mode pressure gradient and the
divergence-free (Leray) projection.

The pressure solves  Delta p = -sum_{i,j} v_{i,j} v_{j,i}  with zero-mean
gauge; its gradient modes are

    p_{,i alpha} = 2 pi i alpha_i p_alpha,
    p_alpha     = G_alpha / (4 pi^2 |alpha|^2),   alpha != 0,

where G is the mode array of sum_{i,j} v_{i,j} v_{j,i}.  The quadratic term
is evaluated pseudo-spectrally (grid product + 2/3 dealiasing); a direct
double-sum oracle over mode pairs lives in the test suite.
"""

from __future__ import annotations

import warnings

import numpy as np

from .spectral import PhysicalField, SpectralField, dealias, divergence, to_grid, to_modes

__all__ = ["leray_project", "poisson_pressure", "pressure_gradient_modes", "velocity_gradient_contraction"]


def velocity_gradient_contraction(v: SpectralField) -> SpectralField:
    """Mode array of sum_{i,j} v_{i,j} v_{j,i}, dealiased (scalar field)."""
    grid = v.grid
    n = grid.n
    # grid values of all partials d v_i / d x_j
    dgrids = np.empty((n, n) + grid.shape)
    for i in range(n):
        for j in range(n):
            dmodes = 2j * np.pi * grid.alpha(j) * v.modes[i]
            dgrids[i, j] = to_grid(SpectralField(grid, dmodes[None])).values[0]
    contraction = np.zeros(grid.shape)
    for i in range(n):
        for j in range(n):
            contraction += dgrids[i, j] * dgrids[j, i]
    return dealias(to_modes(PhysicalField(grid, contraction[None])))


def poisson_pressure(v: SpectralField) -> SpectralField:
    """Zero-mean spectral solve of Delta p = -sum_{i,j} v_{i,j} v_{j,i}."""
    grid = v.grid
    g = velocity_gradient_contraction(v).modes[0]
    denom = 4.0 * np.pi**2 * grid.alpha_sq()
    denom_safe = np.where(denom == 0, 1.0, denom)
    p = g / denom_safe
    p = np.where(denom == 0, 0.0, p)
    return SpectralField(grid, p[None])


def pressure_gradient_modes(v: SpectralField, i: int, divergence_warn=1e-8) -> SpectralField:
    """Mode array of d p / d x_i for the velocity field v.

    Warns (does not reject) when v is visibly not divergence-free, since the
    pressure formula presumes a solenoidal field.
    """
    div_max = np.max(np.abs(divergence(v).modes))
    scale = max(np.max(np.abs(v.modes)), 1e-300)
    if div_max > divergence_warn * scale:
        warnings.warn(f"pressure gradient of a non-solenoidal field (max divergence mode {div_max:.3e})")
    grid = v.grid
    p = poisson_pressure(v).modes[0]
    out = 2j * np.pi * grid.alpha(i) * p
    return SpectralField(grid, out[None])


def leray_project(f: SpectralField) -> SpectralField:
    """Orthogonal mode-wise projection onto divergence-free fields.

    For alpha != 0 subtracts alpha (alpha . v_alpha)/|alpha|^2; the mean mode
    is untouched (constants are solenoidal and orthogonal to gradients).
    """
    grid = f.grid
    if f.ncomp != grid.n:
        raise ValueError("projection needs one component per spatial dimension")
    asq = grid.alpha_sq()
    asq_safe = np.where(asq == 0, 1.0, asq)
    dot = np.zeros(grid.shape, dtype=complex)
    for k in range(grid.n):
        dot += grid.alpha(k) * f.modes[k]
    out = np.empty_like(f.modes)
    for k in range(grid.n):
        out[k] = f.modes[k] - grid.alpha(k) * dot / asq_safe
    # alpha = 0: projection acts as identity
    zero = asq == 0
    for k in range(grid.n):
        out[k][zero] = f.modes[k][zero]
    return SpectralField(grid, out)
