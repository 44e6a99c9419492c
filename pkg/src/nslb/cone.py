"""Backward space-time cones, the cone-to-cylinder change of variables, and
the comparison field living on the cylinder.

A cone with tip (t_s, x_s) and entry time t_1 maps to an infinite cylinder
through

    tau = t / (t_s - t),        z = (x - x_s) / (t_s - t),

so a finite-time tip becomes the infinite-tau limit.  The comparison field
w(tau, z) = v(t, x) obeys a drift-diffusion system whose coefficients are

    mu_diffusion = 1 / t_s            (constant),
    mu_drift     = (t_s - t) / t_s  = 1 / (1 + tau).

Cylinder cross sections are represented on a Cartesian grid masked to the
base ball; one-sided second-order stencils handle the mask edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

__all__ = [
    "ConeSpec",
    "CylinderSpec",
    "ComparisonField",
    "BallGrid",
    "MuCoeffs",
    "tau_of_t",
    "t_of_tau",
    "dtau_dt",
    "mu_coeffs",
    "derivative_rescale",
    "sample_w",
    "sample_w_function",
    "TrajectorySampler",
    "transformed_residual",
    "poisson_dirichlet",
]


@dataclass(frozen=True)
class ConeSpec:
    """Backward cone {(t, x): t_1 < t < t_s, |x - x_s| < t_s - t}.

    Only the non-degenerate scaling exponent 1 is supported; other values
    change the character of the transformed diffusion coefficient.
    """

    t_s: float
    x_s: tuple
    t_1: float
    rho: float = 1.0

    def __post_init__(self):
        if self.t_s <= 0:
            raise ValueError("singular time must be positive")
        if not 0 < self.t_1 < self.t_s:
            raise ValueError("entry time must satisfy 0 < t_1 < t_s")
        if self.rho != 1.0:
            raise ValueError("only scaling exponent rho = 1 is supported")
        object.__setattr__(self, "x_s", tuple(float(c) for c in self.x_s))

    @property
    def n(self):
        return len(self.x_s)


@dataclass(frozen=True)
class CylinderSpec:
    """Transformed domain [t_in, inf) x (ball of radius r_0)."""

    t_in: float
    r_0: float

    def __post_init__(self):
        if self.t_in <= 0 or self.r_0 <= 0:
            raise ValueError("cylinder entry time and base radius must be positive")

    @classmethod
    def from_cone(cls, cone: ConeSpec) -> "CylinderSpec":
        return cls(t_in=cone.t_1 / (cone.t_s - cone.t_1), r_0=cone.t_s - cone.t_1)


def tau_of_t(t, cone: ConeSpec):
    """tau = t / (t_s - t); rejects t >= t_s (the tip maps to infinity)."""
    t = np.asarray(t, dtype=float)
    if np.any(t >= cone.t_s):
        raise ValueError("t must satisfy t < t_s")
    return t / (cone.t_s - t)


def t_of_tau(tau, cone: ConeSpec):
    """Inverse map t = t_s tau / (1 + tau); t < t_s for every finite tau."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be nonnegative")
    return cone.t_s * tau / (1.0 + tau)


def dtau_dt(t, cone: ConeSpec):
    """d tau / d t = t_s / (t_s - t)^2 > 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t >= cone.t_s):
        raise ValueError("t must satisfy t < t_s")
    return cone.t_s / (cone.t_s - t) ** 2


class MuCoeffs(NamedTuple):
    mu1: float  # drift coefficient, 1/(1+tau)
    mu2: float  # diffusion coefficient, 1/t_s (constant)


def mu_coeffs(tau, cone: ConeSpec) -> MuCoeffs:
    """Drift and diffusion coefficients of the transformed system.

    mu2 = (t_s - t)^0 / t_s = 1/t_s for all tau; mu1 = (t_s - t)/t_s, which
    equals 1/(1+tau) and decays to zero up the cylinder.
    """
    tau = float(tau)
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    return MuCoeffs(mu1=1.0 / (1.0 + tau), mu2=1.0 / cone.t_s)


def derivative_rescale(order, tau, cone: ConeSpec) -> float:
    """(t_s - t)^{-|order|} = ((1 + tau)/t_s)^{|order|} relating |D^a_x v| to |D^a_z w|."""
    total = int(np.sum(order)) if np.ndim(order) else int(order)
    if total < 0:
        raise ValueError("derivative order must be nonnegative")
    return float(((1.0 + tau) / cone.t_s) ** total)


class BallGrid:
    """Cartesian grid over [-radius, radius]^n masked to the closed ball.

    Nodes are uniformly spaced with the endpoints included; ``mask`` marks
    nodes inside the ball, ``interior`` those whose axis neighbours are all
    masked (the rest form the numeric boundary ring).
    """

    def __init__(self, n, radius, m):
        if n not in (2, 3):
            raise ValueError("ball grid supports n in {2, 3}")
        if m < 8:
            raise ValueError("need at least 8 nodes per axis")
        self.n = n
        self.radius = float(radius)
        self.m = int(m)
        self.axis = np.linspace(-radius, radius, m)
        self.h = self.axis[1] - self.axis[0]
        mesh = np.meshgrid(*(self.axis,) * n, indexing="ij")
        self.mesh = mesh
        r_sq = sum(c**2 for c in mesh)
        self.mask = r_sq <= radius**2 + 1e-12
        interior = self.mask.copy()
        for axis in range(n):
            lo = np.roll(self.mask, 1, axis=axis)
            hi = np.roll(self.mask, -1, axis=axis)
            # roll wraps; edge planes of the box are never interior anyway
            edge = np.zeros_like(self.mask)
            sl_lo = [slice(None)] * n
            sl_lo[axis] = 0
            sl_hi = [slice(None)] * n
            sl_hi[axis] = m - 1
            edge[tuple(sl_lo)] = True
            edge[tuple(sl_hi)] = True
            interior &= lo & hi & ~edge
        self.interior = interior
        self.boundary = self.mask & ~self.interior

    def points(self, which=None):
        """(m_pts, n) coordinates of masked nodes ('mask', 'interior', 'boundary')."""
        sel = {None: self.mask, "mask": self.mask, "interior": self.interior, "boundary": self.boundary}[which]
        return np.stack([c[sel] for c in self.mesh], axis=-1)

    def partial(self, values, axis):
        """d/dz_axis with centered stencils inside and one-sided O(h^2) at the edge."""
        v = np.asarray(values, dtype=float)
        out = np.zeros_like(v)
        h = self.h
        m = self.m

        def shifted(arr, k):
            pad = np.zeros_like(arr)
            s_src = [slice(None)] * self.n
            s_dst = [slice(None)] * self.n
            if k > 0:
                s_src[axis] = slice(k, m)
                s_dst[axis] = slice(0, m - k)
            else:
                s_src[axis] = slice(0, m + k)
                s_dst[axis] = slice(-k, m)
            pad[tuple(s_dst)] = arr[tuple(s_src)]
            return pad

        mask_f1 = shifted(self.mask, 1)
        mask_b1 = shifted(self.mask, -1)
        mask_f2 = shifted(self.mask, 2)
        mask_b2 = shifted(self.mask, -2)
        v_f1 = shifted(v, 1)
        v_b1 = shifted(v, -1)
        v_f2 = shifted(v, 2)
        v_b2 = shifted(v, -2)

        centered = self.mask & mask_f1 & mask_b1
        out[centered] = (v_f1[centered] - v_b1[centered]) / (2 * h)
        fwd = self.mask & ~mask_b1 & mask_f1 & mask_f2
        out[fwd] = (-3 * v[fwd] + 4 * v_f1[fwd] - v_f2[fwd]) / (2 * h)
        bwd = self.mask & ~mask_f1 & mask_b1 & mask_b2
        out[bwd] = (3 * v[bwd] - 4 * v_b1[bwd] + v_b2[bwd]) / (2 * h)
        lone = self.mask & ~(centered | fwd | bwd)
        if np.any(lone):
            # single-neighbour fallback, first order
            f_only = lone & mask_f1
            out[f_only] = (v_f1[f_only] - v[f_only]) / h
            b_only = lone & mask_b1 & ~mask_f1
            out[b_only] = (v[b_only] - v_b1[b_only]) / h
        out[~self.mask] = 0.0
        return out

    def second_partial(self, values, axis):
        v = np.asarray(values, dtype=float)
        out = np.zeros_like(v)
        h = self.h
        m = self.m

        def shifted(arr, k):
            pad = np.zeros_like(arr)
            s_src = [slice(None)] * self.n
            s_dst = [slice(None)] * self.n
            if k > 0:
                s_src[axis] = slice(k, m)
                s_dst[axis] = slice(0, m - k)
            else:
                s_src[axis] = slice(0, m + k)
                s_dst[axis] = slice(-k, m)
            pad[tuple(s_dst)] = arr[tuple(s_src)]
            return pad

        masks = {k: shifted(self.mask, k) for k in (-3, -2, -1, 1, 2, 3)}
        vals = {k: shifted(v, k) for k in (-3, -2, -1, 1, 2, 3)}
        centered = self.mask & masks[1] & masks[-1]
        out[centered] = (vals[1][centered] - 2 * v[centered] + vals[-1][centered]) / h**2
        fwd = self.mask & ~masks[-1] & masks[1] & masks[2] & masks[3]
        out[fwd] = (2 * v[fwd] - 5 * vals[1][fwd] + 4 * vals[2][fwd] - vals[3][fwd]) / h**2
        bwd = self.mask & ~masks[1] & masks[-1] & masks[-2] & masks[-3]
        out[bwd] = (2 * v[bwd] - 5 * vals[-1][bwd] + 4 * vals[-2][bwd] - vals[-3][bwd]) / h**2
        lone = self.mask & ~(centered | fwd | bwd)
        if np.any(lone):
            f2 = lone & masks[1] & masks[2]
            out[f2] = (v[f2] - 2 * vals[1][f2] + vals[2][f2]) / h**2
            b2 = lone & masks[-1] & masks[-2] & ~(masks[1] & masks[2])
            out[b2] = (v[b2] - 2 * vals[-1][b2] + vals[-2][b2]) / h**2
        out[~self.mask] = 0.0
        return out

    def laplacian(self, values):
        return sum(self.second_partial(values, axis) for axis in range(self.n))


@dataclass(frozen=True)
class ComparisonField:
    """w sampled on a cylinder cross section: w(tau, z) = v(t(tau), x_s + (t_s - t) z)."""

    tau: float
    ball: BallGrid
    values: np.ndarray  # (ncomp, m, ..., m), zero outside the mask

    @property
    def ncomp(self):
        return self.values.shape[0]

    def divergence_fd(self):
        """Finite-difference divergence in z over the mask."""
        return sum(self.ball.partial(self.values[k], k) for k in range(self.ball.n))


def _cone_points(cone: ConeSpec, t, z_points):
    return np.asarray(cone.x_s) + (cone.t_s - t) * np.asarray(z_points)


def sample_w_function(velocity_fn, cone: ConeSpec, tau, ball: BallGrid, margin=0.05) -> ComparisonField:
    """Sample w from an analytic velocity callable velocity_fn(t, points)->(ncomp, m)."""
    cyl = CylinderSpec.from_cone(cone)
    if ball.radius > cyl.r_0 * (1 + margin):
        raise ValueError(f"ball radius {ball.radius} exceeds cylinder base {cyl.r_0} (margin {margin})")
    t = float(t_of_tau(tau, cone))
    pts = ball.points("mask")
    vals = np.asarray(velocity_fn(t, _cone_points(cone, t, pts)))
    ncomp = vals.shape[0]
    out = np.zeros((ncomp,) + ball.mask.shape)
    for c in range(ncomp):
        out[c][ball.mask] = vals[c]
    return ComparisonField(float(tau), ball, out)


def sample_w(trajectory, cone: ConeSpec, tau, ball: BallGrid, margin=0.05) -> ComparisonField:
    """Sample w from a stored trajectory (linear in time, multilinear in space)."""
    t = float(t_of_tau(tau, cone))
    if t < trajectory.times[0] - 1e-12 or t > trajectory.times[-1] + 1e-12:
        raise ValueError(f"tau={tau} maps to t={t} outside the trajectory range")
    return sample_w_function(trajectory.velocity_at, cone, tau, ball, margin=margin)


class TrajectorySampler:
    """Adapter exposing velocity and pressure samples of a solver trajectory."""

    def __init__(self, trajectory):
        self.trajectory = trajectory

    def velocity(self, t, points):
        return self.trajectory.velocity_at(t, points)

    def pressure(self, t, points):
        from .leray import poisson_pressure
        from .spectral import interpolate_periodic, to_grid

        f = self.trajectory.field_at(t)
        p = to_grid(poisson_pressure(f))
        return interpolate_periodic(p.values, self.trajectory.grid, points)[0]


def poisson_dirichlet(ball: BallGrid, rhs_values, boundary_values):
    """Solve Delta p = rhs on the masked interior with nodal Dirichlet data.

    ``boundary_values`` is defined on the boundary ring; returns p on the
    full mask (boundary data reproduced exactly).
    """
    n = ball.n
    mask = ball.mask
    interior = ball.interior
    idx = -np.ones(mask.shape, dtype=int)
    idx[interior] = np.arange(int(np.sum(interior)))
    m_int = int(np.sum(interior))
    h2 = ball.h**2

    rows, cols, data = [], [], []
    b = np.zeros(m_int)
    rhs_flat = np.asarray(rhs_values)
    bvals = np.asarray(boundary_values)

    int_indices = np.argwhere(interior)
    for row, node in enumerate(int_indices):
        node_t = tuple(node)
        rows.append(row)
        cols.append(row)
        data.append(-2.0 * n / h2)
        b[row] += rhs_flat[node_t]
        for axis in range(n):
            for step in (-1, 1):
                nb = node.copy()
                nb[axis] += step
                nb_t = tuple(nb)
                if interior[nb_t]:
                    rows.append(row)
                    cols.append(idx[nb_t])
                    data.append(1.0 / h2)
                else:
                    b[row] -= bvals[nb_t] / h2
    mat = scipy.sparse.csr_matrix((data, (rows, cols)), shape=(m_int, m_int))
    sol = scipy.sparse.linalg.spsolve(mat, b)
    p = np.zeros(mask.shape)
    p[interior] = sol
    p[ball.boundary] = bvals[ball.boundary]
    return p


@dataclass(frozen=True)
class TransformedResidual:
    tau: float
    residual_l2: float
    residual_max: float
    components: np.ndarray
    interior_count: int


def transformed_residual(sampler, cone: ConeSpec, tau, ball: BallGrid, dtau=None) -> TransformedResidual:
    """Residual of the transformed momentum equation on the cross section.

    Evaluates  dw/dtau - mu2 nu ... the full drift-diffusion balance
    with the pressure gradient obtained from the cross-section Poisson
    problem (Dirichlet data sampled from the outer pressure); the time
    derivative uses a centered difference in tau.  ``sampler`` must expose
    ``velocity(t, points)`` and ``pressure(t, points)`` plus a ``nu``
    attribute.
    """
    if dtau is None:
        dtau = ball.h
    nu = sampler.nu
    mu1, mu2 = mu_coeffs(tau, cone)
    w_minus = sample_w_function(sampler.velocity, cone, tau - dtau, ball)
    w_mid = sample_w_function(sampler.velocity, cone, tau, ball)
    w_plus = sample_w_function(sampler.velocity, cone, tau + dtau, ball)
    wdot = (w_plus.values - w_minus.values) / (2 * dtau)

    t = float(t_of_tau(tau, cone))
    n = ball.n
    # pressure on the cross section from the Poisson problem
    grad_w = np.stack([[ball.partial(w_mid.values[i], j) for j in range(n)] for i in range(n)])
    rhs_p = -sum(grad_w[i][j] * grad_w[j][i] for i in range(n) for j in range(n))
    p_bc = np.zeros(ball.mask.shape)
    bpts = ball.points("boundary")
    p_bc[ball.boundary] = sampler.pressure(t, _cone_points(cone, t, bpts))
    p_w = poisson_dirichlet(ball, rhs_p, p_bc)

    residual = np.zeros_like(w_mid.values)
    for i in range(n):
        lap = ball.laplacian(w_mid.values[i])
        drift = np.zeros(ball.mask.shape)
        for j in range(n):
            drift += (w_mid.values[j] + ball.mesh[j]) * grad_w[i][j]
        dp = ball.partial(p_w, i)
        residual[i] = wdot[i] - mu2 * nu * lap + mu1 * drift + mu1 * dp
    sel = ball.interior
    comp = residual[:, sel]
    count = int(np.sum(sel))
    res_l2 = float(np.sqrt(np.mean(np.sum(comp**2, axis=0))))
    return TransformedResidual(float(tau), res_l2, float(np.max(np.abs(comp))), residual, count)
