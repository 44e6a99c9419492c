"""Fourier-space fields on the unit torus [-0.5, 0.5]^n.

A field is stored as a truncated Fourier series

    f(x) = sum_alpha  f_alpha exp(2 pi i alpha . x),    |alpha_k| <= N/2,

so all 2*pi factors live in the mode formulas and the physical grid is
the uniform lattice x_j = -0.5 + j/N.  Real-valued fields carry the
conjugate symmetry f_{-alpha} = conj(f_alpha); it is enforced on entry,
never assumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "TorusGrid",
    "SpectralField",
    "PhysicalField",
    "to_modes",
    "to_grid",
    "derivative",
    "divergence",
    "sobolev_norm",
    "dealias",
    "hermitian_symmetrize",
    "interpolate_periodic",
]


@dataclass(frozen=True)
class TorusGrid:
    """Uniform N^n lattice on the unit torus, n in {2, 3}, N even, N >= 8."""

    n: int
    N: int
    period: float = 1.0

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"spatial dimension must be 2 or 3, got {self.n}")
        if self.N < 8 or self.N % 2 != 0:
            raise ValueError(f"N must be even and >= 8, got {self.N}")
        if self.period != 1.0:
            raise ValueError("grid is normalized to unit period")

    @property
    def shape(self):
        return (self.N,) * self.n

    @property
    def spacing(self):
        return 1.0 / self.N

    def axis_coords(self):
        """Grid coordinates of one axis, x_j = -0.5 + j/N."""
        return -0.5 + np.arange(self.N) / self.N

    def meshes(self):
        """List of n coordinate arrays of shape N^n (ij indexing)."""
        return np.meshgrid(*(self.axis_coords(),) * self.n, indexing="ij")

    def wavenumbers(self):
        """Integer wavenumbers of one axis in FFT order (Nyquist stored as -N/2)."""
        return np.fft.fftfreq(self.N, 1.0 / self.N)

    def alpha(self, axis):
        """Wavenumbers of one axis, broadcastable against an N^n array."""
        shape = [1] * self.n
        shape[axis] = self.N
        return self.wavenumbers().reshape(shape)

    def alpha_sq(self):
        """|alpha|^2 on the full mode lattice."""
        out = np.zeros(self.shape)
        for axis in range(self.n):
            out = out + self.alpha(axis) ** 2
        return out


def _mode_phase(grid):
    """(-1)^(alpha_1 + ... + alpha_n), the exact phase of the -0.5 grid offset."""
    phase = np.ones(grid.shape)
    for axis in range(grid.n):
        k = grid.alpha(axis).astype(int)
        phase = phase * np.where(k % 2 == 0, 1.0, -1.0)
    return phase


@dataclass(frozen=True)
class SpectralField:
    """Mode representation of a field with one or more components.

    ``modes`` has shape (ncomp, N, ..., N) in FFT ordering along each
    spatial axis.  Velocity fields carry grid.n components; scalars one.
    """

    grid: TorusGrid
    modes: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.modes, dtype=complex)
        if m.ndim == self.grid.n:
            m = m[None]
        if m.shape[1:] != self.grid.shape:
            raise ValueError(f"mode array shape {m.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "modes", m)

    @property
    def ncomp(self):
        return self.modes.shape[0]

    def component(self, i):
        return SpectralField(self.grid, self.modes[i][None])

    def __add__(self, other):
        return SpectralField(self.grid, self.modes + other.modes)

    def __sub__(self, other):
        return SpectralField(self.grid, self.modes - other.modes)

    def __mul__(self, scalar):
        return SpectralField(self.grid, self.modes * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class PhysicalField:
    """Real grid values, shape (ncomp, N, ..., N)."""

    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == self.grid.n:
            v = v[None]
        if v.shape[1:] != self.grid.shape:
            raise ValueError(f"value array shape {v.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", v)

    @property
    def ncomp(self):
        return self.values.shape[0]

    def l2_norm(self):
        """Grid L2 norm, sqrt(sum_i mean_x v_i^2) (unit-volume torus)."""
        return float(np.sqrt(np.sum(np.mean(self.values**2, axis=tuple(range(1, self.values.ndim))))))

    def max_abs(self):
        return float(np.max(np.abs(self.values)))


def hermitian_symmetrize(modes, grid):
    """Project onto the conjugate-symmetric subspace, v_{-alpha} = conj(v_alpha)."""
    axes = tuple(range(modes.ndim - grid.n, modes.ndim))
    refl = np.conj(modes)
    for ax in axes:
        refl = np.roll(np.flip(refl, axis=ax), 1, axis=ax)
    return 0.5 * (modes + refl)


def to_modes(f: PhysicalField) -> SpectralField:
    """Forward transform; rejects non-finite input, enforces conjugate symmetry."""
    if not np.all(np.isfinite(f.values)):
        raise ValueError("physical field contains non-finite values")
    grid = f.grid
    axes = tuple(range(1, 1 + grid.n))
    raw = np.fft.fftn(f.values, axes=axes) / grid.N**grid.n
    modes = raw * _mode_phase(grid)
    modes = hermitian_symmetrize(modes, grid)
    return SpectralField(grid, modes)


def to_grid(v: SpectralField) -> PhysicalField:
    """Inverse transform onto the lattice; imaginary residue is discarded."""
    grid = v.grid
    axes = tuple(range(1, 1 + grid.n))
    vals = np.fft.ifftn(v.modes * _mode_phase(grid), axes=axes) * grid.N**grid.n
    return PhysicalField(grid, vals.real)


def derivative(v: SpectralField, i: int, k: int) -> SpectralField:
    """Spectral d/dx_k of component i: mode alpha maps to 2 pi i alpha_k v_{i,alpha}."""
    if not 0 <= k < v.grid.n:
        raise ValueError(f"direction {k} out of range for n={v.grid.n}")
    out = 2j * np.pi * v.grid.alpha(k) * v.modes[i]
    return SpectralField(v.grid, out[None])


def divergence(v: SpectralField) -> SpectralField:
    """Mode-wise sum_k 2 pi i alpha_k v_{k,alpha}; returns a scalar field."""
    if v.ncomp != v.grid.n:
        raise ValueError("divergence needs one component per spatial dimension")
    out = np.zeros(v.grid.shape, dtype=complex)
    for k in range(v.grid.n):
        out += 2j * np.pi * v.grid.alpha(k) * v.modes[k]
    return SpectralField(v.grid, out[None])


def sobolev_norm(v: SpectralField, s: float) -> float:
    """sqrt( sum_i sum_alpha |v_{i,alpha}|^2 (1+|alpha|^2)^s )."""
    if not np.isfinite(s):
        raise ValueError("Sobolev order must be finite")
    weight = (1.0 + v.grid.alpha_sq()) ** s
    return float(np.sqrt(np.sum(np.abs(v.modes) ** 2 * weight)))


def dealias(v: SpectralField) -> SpectralField:
    """2/3-rule truncation: zero every mode with some |alpha_k| > N/3."""
    grid = v.grid
    cutoff = grid.N / 3.0
    keep = np.ones(grid.shape, dtype=bool)
    for axis in range(grid.n):
        keep &= np.abs(grid.alpha(axis)) <= cutoff
    return SpectralField(grid, v.modes * keep)


def dealias_mask(grid: TorusGrid):
    cutoff = grid.N / 3.0
    keep = np.ones(grid.shape, dtype=bool)
    for axis in range(grid.n):
        keep &= np.abs(grid.alpha(axis)) <= cutoff
    return keep


def interpolate_periodic(values, grid: TorusGrid, points):
    """Multilinear periodic interpolation of (ncomp, N^n) grid values.

    ``points`` has shape (m, n) in torus coordinates; returns (ncomp, m).
    """
    values = np.asarray(values)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != grid.n:
        raise ValueError(f"points must have {grid.n} columns")
    u = (pts + 0.5) * grid.N  # fractional lattice coordinates
    base = np.floor(u).astype(int)
    frac = u - base
    ncomp = values.shape[0]
    out = np.zeros((ncomp, pts.shape[0]))
    for corner in range(2**grid.n):
        idx = []
        w = np.ones(pts.shape[0])
        for axis in range(grid.n):
            bit = (corner >> axis) & 1
            idx.append((base[:, axis] + bit) % grid.N)
            w = w * (frac[:, axis] if bit else 1.0 - frac[:, axis])
        out += values[(slice(None), *idx)] * w
    return out
