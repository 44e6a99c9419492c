import numpy as np
import pytest

from nslb.cone import (
    BallGrid,
    ConeSpec,
    CylinderSpec,
    TrajectorySampler,
    derivative_rescale,
    dtau_dt,
    mu_coeffs,
    poisson_dirichlet,
    sample_w,
    sample_w_function,
    t_of_tau,
    tau_of_t,
    transformed_residual,
)
from nslb.dynamics import SolverConfig, simulate
from nslb.flows import StreamFlow, TaylorGreenFlow, taylor_green
from nslb.spectral import TorusGrid


CONE = ConeSpec(t_s=1.0, x_s=(0.1, -0.2), t_1=0.5)


def test_cone_validation():
    with pytest.raises(ValueError):
        ConeSpec(t_s=1.0, x_s=(0.0, 0.0), t_1=1.5)
    with pytest.raises(ValueError):
        ConeSpec(t_s=-1.0, x_s=(0.0, 0.0), t_1=0.5)
    with pytest.raises(ValueError):
        ConeSpec(t_s=1.0, x_s=(0.0, 0.0), t_1=0.5, rho=1.2)


def test_cylinder_from_cone():
    cyl = CylinderSpec.from_cone(CONE)
    assert cyl.t_in == pytest.approx(0.5 / 0.5)
    assert cyl.r_0 == pytest.approx(0.5)


def test_time_map_values():
    cone = ConeSpec(t_s=1.0, x_s=(0.0, 0.0), t_1=0.25)
    assert tau_of_t(0.0, cone) == 0.0
    assert tau_of_t(0.5, cone) == pytest.approx(1.0)
    assert t_of_tau(0.0, cone) == 0.0
    assert t_of_tau(1.0, cone) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        tau_of_t(1.0, cone)
    # far-time behaviour: t_s - t = t_s/(1+tau) even at tau = 1e6
    tau = 1e6
    assert cone.t_s - t_of_tau(tau, cone) == pytest.approx(cone.t_s / (1 + tau), rel=1e-12)


def test_bijection_and_identity():
    taus = np.logspace(-3, 3, 301)
    ts = t_of_tau(taus, CONE)
    assert np.max(np.abs(tau_of_t(ts, CONE) - taus) / taus) < 1e-13
    assert np.max(np.abs(CONE.t_s - ts - CONE.t_s / (1 + taus))) < 1e-15


def test_dtau_dt():
    cone1 = ConeSpec(t_s=1.0, x_s=(0.0, 0.0), t_1=0.5)
    cone2 = ConeSpec(t_s=2.0, x_s=(0.0, 0.0), t_1=0.5)
    assert dtau_dt(0.0, cone1) == pytest.approx(1.0)
    assert dtau_dt(1.0, cone2) == pytest.approx(2.0)
    # positivity on a dense sample and FD agreement
    ts = np.linspace(0.0, 0.95, 200)
    assert np.all(dtau_dt(ts, cone1) > 0)
    h = 1e-6
    fd = (tau_of_t(ts + h, cone1) - tau_of_t(ts - h, cone1)) / (2 * h)
    assert np.max(np.abs(fd - dtau_dt(ts, cone1)) / dtau_dt(ts, cone1)) < 1e-6


def test_mu_coefficients():
    cone = ConeSpec(t_s=2.0, x_s=(0.0, 0.0), t_1=0.5)
    mu1_0, mu2_0 = mu_coeffs(0.0, cone)
    # mu2 = 1/t_s throughout; mu1 = (t_s - t)/t_s = 1/(1+tau)
    assert mu2_0 == pytest.approx(0.5)
    assert mu1_0 == pytest.approx(1.0)
    mu1_1, mu2_1 = mu_coeffs(1.0, cone)
    assert mu1_1 == pytest.approx(0.5)
    assert mu2_1 == pytest.approx(0.5)
    for tau in (0.0, 1.0, 10.0, 100.0):
        mu1, mu2 = mu_coeffs(tau, cone)
        assert mu2 == pytest.approx(0.5, abs=1e-15)  # constant in tau
        assert mu1 * (1 + tau) == pytest.approx(1.0, abs=1e-12)
        assert mu1 <= mu_coeffs(0.0, cone).mu1 + 1e-15


def test_derivative_rescale():
    cone = ConeSpec(t_s=1.0, x_s=(0.0, 0.0), t_1=0.4)
    assert derivative_rescale(0, 5.0, cone) == 1.0
    # |alpha| = 1 at t_s - t = 0.5  ->  factor 2
    tau_half = tau_of_t(0.5, cone)
    assert derivative_rescale(1, tau_half, cone) == pytest.approx(2.0)
    assert derivative_rescale((1, 1), 1.0, cone) == pytest.approx(4.0)


def test_sample_constant_field():
    ball = BallGrid(2, 0.3, 17)
    w = sample_w_function(lambda t, pts: np.full((2, len(pts)), 3.25), CONE, 2.0, ball)
    for c in range(2):
        assert np.max(np.abs(w.values[c][ball.mask] - 3.25)) == 0.0


def test_sample_affine_field():
    cone = ConeSpec(t_s=1.0, x_s=(0.0, 0.0), t_1=0.4)
    ball = BallGrid(2, 0.3, 17)
    w = sample_w_function(lambda t, pts: np.asarray(pts)[:, 0][None], cone, 1.0, ball)
    assert np.max(np.abs((w.values[0] - 0.5 * ball.mesh[0])[ball.mask])) < 1e-14


def test_sample_rejects_oversized_ball():
    ball = BallGrid(2, 0.9, 17)  # cylinder base is 0.5
    with pytest.raises(ValueError):
        sample_w_function(lambda t, pts: np.zeros((2, len(pts))), CONE, 2.0, ball)


def test_sample_from_trajectory_and_range_check():
    grid = TorusGrid(2, 32)
    cfg = SolverConfig(nu=0.05, dt=1e-3, t_end=0.3, snapshot_stride=10)
    traj = simulate(taylor_green(grid, 1.0), cfg)
    cone = ConeSpec(t_s=0.4, x_s=(0.1, 0.0), t_1=0.1)
    ball = BallGrid(2, 0.2, 13)
    tau = tau_of_t(0.2, cone)
    w = sample_w(traj, cone, tau, ball)
    flow = TaylorGreenFlow(nu=0.05, amplitude=1.0)
    exact = sample_w_function(flow.velocity, cone, tau, ball)
    err = np.max(np.abs(w.values - exact.values))
    assert err < 5e-3  # torus-grid interpolation error, O(h^2)
    with pytest.raises(ValueError):
        sample_w(traj, cone, tau_of_t(0.39, cone), ball)  # t beyond the run


def test_incompressibility_transfer_order():
    # divergence of the sampled comparison field vanishes at second order
    flow = StreamFlow(k1=1, k2=2)
    cyl = CylinderSpec.from_cone(CONE)
    tau0 = tau_of_t(0.75, CONE)
    errs = {}
    for m in (17, 33, 65):
        ball = BallGrid(2, 0.8 * cyl.r_0, m)
        div = sample_w_function(flow.velocity, CONE, tau0, ball).divergence_fd()
        errs[m] = np.sqrt(np.mean(div[ball.interior] ** 2))
    assert np.log2(errs[17] / errs[33]) >= 1.8
    assert np.log2(errs[33] / errs[65]) >= 1.8


def test_ball_grid_fd_exact_on_quadratics():
    ball = BallGrid(2, 0.4, 21)
    z1, z2 = ball.mesh
    q = z1**2 + 3 * z2 + 0.5 * z1 * z2
    # nodes with a full one-sided or centered stencil reproduce quadratics
    full = ball.interior.copy()
    d1 = ball.partial(q, 0)
    assert np.max(np.abs((d1 - (2 * z1 + 0.5 * z2))[full])) < 1e-10
    lap = ball.laplacian(q)
    assert np.max(np.abs((lap - 2.0)[full])) < 1e-9


def test_poisson_dirichlet_manufactured():
    errs = {}
    for m in (21, 41):
        ball = BallGrid(2, 0.5, m)
        z1, z2 = ball.mesh
        exact = np.sin(np.pi * z1) * np.cos(np.pi * z2)
        rhs = -2 * np.pi**2 * exact
        p = poisson_dirichlet(ball, rhs, exact)
        errs[m] = np.max(np.abs((p - exact)[ball.mask]))
    assert errs[41] <= errs[21] / 3.0  # second-order solve


def test_transformed_residual_zero_field():
    class Zero:
        nu = 0.1

        @staticmethod
        def velocity(t, pts):
            return np.zeros((2, len(pts)))

        @staticmethod
        def pressure(t, pts):
            return np.zeros(len(pts))

    ball = BallGrid(2, 0.4, 17)
    rep = transformed_residual(Zero, CONE, 2.0, ball)
    assert rep.residual_l2 == 0.0


def test_transformed_residual_constant_field_steady():
    # constants are steady states of the transformed system: the drift sees
    # zero gradients and the pressure gradient vanishes
    class Const:
        nu = 0.1

        @staticmethod
        def velocity(t, pts):
            out = np.zeros((2, len(pts)))
            out[0] = 0.7
            out[1] = -0.3
            return out

        @staticmethod
        def pressure(t, pts):
            return np.full(len(pts), 0.9)

    ball = BallGrid(2, 0.4, 17)
    rep = transformed_residual(Const, CONE, 2.0, ball)
    assert rep.residual_max < 1e-11


def test_transformed_residual_refinement():
    # sampled smooth-flow residual drops by >= 3.5x per grid doubling
    nu = 0.02
    flow = TaylorGreenFlow(nu=nu, amplitude=1.0)

    class Sampler:
        velocity = staticmethod(flow.velocity)
        pressure = staticmethod(flow.pressure)

    Sampler.nu = nu
    cyl = CylinderSpec.from_cone(CONE)
    tau0 = tau_of_t(0.75, CONE)
    res = {}
    for m in (17, 33):
        ball = BallGrid(2, 0.8 * cyl.r_0, m)
        res[m] = transformed_residual(Sampler, CONE, tau0, ball, dtau=ball.h).residual_l2
    assert res[17] / res[33] >= 3.5


def test_trajectory_sampler_pressure():
    grid = TorusGrid(2, 32)
    cfg = SolverConfig(nu=0.05, dt=1e-3, t_end=0.1, snapshot_stride=10)
    traj = simulate(taylor_green(grid, 1.0), cfg)
    sampler = TrajectorySampler(traj)
    flow = TaylorGreenFlow(nu=0.05, amplitude=1.0)
    pts = np.array([[0.05, 0.1], [-0.2, 0.3]])
    got = sampler.pressure(0.05, pts)
    want = flow.pressure(0.05, pts)
    # bilinear error for a wavenumber-2 pressure at N=32 is (4 pi h)^2/8 ~ 2%
    assert np.max(np.abs(got - want)) < 2e-2 * np.max(np.abs(want))
