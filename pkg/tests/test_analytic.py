"""Exact interference fields, velocities, and trajectories."""

import numpy as np
import pytest

from slitsim import analytic
from slitsim.core import UniformGrid, WavePacketParams
from slitsim.errors import NodeError


def test_complex_width():
    p = WavePacketParams()
    assert analytic.sigma_t(p, 1.0) == pytest.approx(0.2 + 2.5j)
    assert analytic.sigma_t(p, 0.0) == pytest.approx(0.2)


def test_initial_amplitude_prefactor():
    # (2 pi sigma0^2)^{-1/4} for sigma0 = 0.2
    p = WavePacketParams()
    fld = analytic.SlitPacketField(p)
    assert abs(fld.psi(p.Y, 0.0)) == pytest.approx(1.412342522906,
                                                   abs=1e-10)


def test_norm_constants():
    p = WavePacketParams()
    assert analytic.norm_constant_one(p) == pytest.approx(
        0.707105463619, abs=1e-10)
    boson = WavePacketParams(particles=2, exchange_sign=+1)
    fermion = WavePacketParams(particles=2, exchange_sign=-1)
    nb = analytic.norm_constant_two(boson)
    nf = analytic.norm_constant_two(fermion)
    w = np.exp(-p.Y ** 2 / (2 * p.sigma0 ** 2))
    assert nb == pytest.approx((2 + 2 * w ** 2) ** -0.5, rel=1e-12)
    assert nf == pytest.approx((2 - 2 * w ** 2) ** -0.5, rel=1e-12)


def test_quadrature_norm_is_one(one_field, boson_field, fermion_field):
    g = UniformGrid(-13.0, 13.0, 521)
    for t in (0.0, 1.0):
        fld = analytic.sample_field(one_field, g, t)
        assert analytic_norm(fld) == pytest.approx(1.0, abs=1e-6)
    g2 = UniformGrid(-4.0, 4.0, 161, dim=2)
    for fld2 in (boson_field, fermion_field):
        sampled = analytic.sample_field(fld2, g2, 0.0)
        assert analytic_norm(sampled) == pytest.approx(1.0, abs=1e-7)


def analytic_norm(fld):
    from slitsim.core import norm
    return norm(fld)


def _time_residual(fld, args, t, eps=1e-5):
    """|i dpsi/dt + (1/2) lap psi| via a central difference in time."""
    dpsi = (fld.psi(*args, t + eps) - fld.psi(*args, t - eps)) / (2 * eps)
    return abs(1j * dpsi + 0.5 * fld.lap(*args, t))


def test_schrodinger_residual_one_particle(packet_field, one_field):
    rng = np.random.default_rng(7)
    for fld in (packet_field, one_field):
        for _ in range(20):
            y = rng.uniform(-2.0, 2.0)
            t = rng.uniform(0.05, 1.0)
            scale = abs(fld.psi(y, t)) + 1.0
            assert _time_residual(fld, (y,), t) < 1e-6 * scale


def test_schrodinger_residual_two_particle(boson_field, fermion_field):
    rng = np.random.default_rng(11)
    for fld in (boson_field, fermion_field):
        for _ in range(10):
            y1, y2 = rng.uniform(-2.0, 2.0, size=2)
            t = rng.uniform(0.05, 1.0)
            scale = abs(fld.psi(y1, y2, t)) + 1.0
            assert _time_residual(fld, (y1, y2), t) < 1e-6 * scale


def test_reflection_symmetry(one_field):
    y = np.linspace(0.1, 1.8, 25)
    for t in (0.0, 0.5, 1.0):
        assert np.allclose(one_field.psi(y, t), one_field.psi(-y, t))
        v = one_field.velocity(y, t)
        assert np.allclose(v, -one_field.velocity(-y, t))
        assert one_field.velocity(0.0, t) == pytest.approx(0.0, abs=1e-14)


def test_exchange_symmetry(boson_field, fermion_field):
    rng = np.random.default_rng(3)
    pts = rng.uniform(-2.0, 2.0, size=(15, 2))
    for t in (0.0, 0.7):
        for y1, y2 in pts:
            pb = boson_field.psi(y1, y2, t)
            assert pb == pytest.approx(boson_field.psi(y2, y1, t),
                                       rel=1e-12)
            pf = fermion_field.psi(y1, y2, t)
            assert pf == pytest.approx(-fermion_field.psi(y2, y1, t),
                                       rel=1e-12, abs=1e-15)


def test_fermion_diagonal_node(fermion_field):
    for y in (-1.0, 0.0, 0.4, 1.3):
        assert fermion_field.psi(y, y, 0.6) == 0.0
    with pytest.raises(NodeError):
        fermion_field.velocity(0.4, 0.4, 0.6)


def test_velocity_matches_phase_gradient(one_field, boson_field):
    # v = d/dy arctan(psi_I / psi_R), checked by finite differences
    eps = 1e-6
    for y, t in ((0.8, 0.5), (1.7, 1.0), (-0.3, 0.9)):
        phase = lambda yy: np.angle(one_field.psi(yy, t))
        v_fd = (phase(y + eps) - phase(y - eps)) / (2 * eps)
        assert one_field.velocity(y, t) == pytest.approx(v_fd, abs=1e-6)
    v1, v2 = boson_field.velocity(0.9, -0.4, 0.8)
    ph = lambda a, b: np.angle(boson_field.psi(a, b, 0.8))
    assert v1 == pytest.approx((ph(0.9 + eps, -0.4) - ph(0.9 - eps, -0.4))
                               / (2 * eps), abs=1e-6)
    assert v2 == pytest.approx((ph(0.9, -0.4 + eps) - ph(0.9, -0.4 - eps))
                               / (2 * eps), abs=1e-6)


def test_packet_velocity_closed_form(packet_field):
    # isolated packet: v = (y - Y) t / (4 sigma0^4 + t^2)
    p = WavePacketParams()
    for y, t in ((1.2, 1.0), (0.5, 0.3), (2.0, 0.8)):
        expected = (y - p.Y) * t / (4 * p.sigma0 ** 4 + t ** 2)
        assert packet_field.velocity(y, t) == pytest.approx(expected,
                                                            rel=1e-10)


def test_quantum_potential_values(packet_field, one_field):
    # isolated packet: Q = 1/(4|s|^2) - (y-Y)^2/(8|s|^4), s = sigma_t
    p = WavePacketParams()
    assert packet_field.quantum_potential(1.0, 0.0) == pytest.approx(6.25)
    s2 = abs(analytic.sigma_t(p, 0.5)) ** 2
    expected = 1 / (4 * s2) - (1.3 - p.Y) ** 2 / (8 * s2 ** 2)
    assert packet_field.quantum_potential(1.3, 0.5) == pytest.approx(
        expected, rel=1e-10)
    # frozen midpoint value of the interference field
    assert one_field.quantum_potential(0.0, 0.0) == pytest.approx(
        -71.875, rel=1e-12)


def test_similarity_trajectory(packet_field):
    # spreading maps y - Y linearly: y(t) = Y + (y0 - Y) |sigma_t|/sigma0
    t_grid = np.linspace(0.0, 1.0, 2001)
    traj = analytic.exact_trajectory(packet_field, (1.2,), t_grid)
    end = traj.positions[-1, 0]
    assert packet_field.similarity_position(1.2, 1.0) == pytest.approx(
        3.507987240797, abs=1e-9)
    assert end == pytest.approx(3.507987240797, abs=1e-6)


def test_longitudinal_drift():
    p = WavePacketParams()
    t = np.array([0.0, 0.5, 1.0])
    assert np.allclose(analytic.x_trajectory(p, 2.0, t), 2.0 + 0.1 * t)


def test_node_guard_in_tails(one_field):
    # closed-form log-amplitude stays finite deep in the Gaussian tails
    g = one_field.log_amplitude(np.array([-5.0, 5.0]), 0.0)
    assert np.all(np.isfinite(g))
    # the velocity's relative node threshold rejects the same points
    with pytest.raises(NodeError):
        one_field.velocity(5.0, 0.0)


def test_field_dispatch():
    one = WavePacketParams()
    two = WavePacketParams(particles=2)
    assert isinstance(analytic.field_for(one), analytic.OneParticleField)
    assert isinstance(analytic.field_for(two), analytic.TwoParticleField)
    assert isinstance(analytic.field_for(one, "single_packet"),
                      analytic.SlitPacketField)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        analytic.Trajectory(times=np.array([0.0, 0.0]),
                            positions=np.zeros((2, 1)), provenance="exact")
    with pytest.raises(ValueError):
        analytic.Trajectory(times=np.array([0.0, 1.0]),
                            positions=np.zeros(2), provenance="exact")
    traj = analytic.Trajectory(times=np.array([0.0, 1.0]),
                               positions=np.zeros((2, 2)),
                               provenance="exact")
    assert traj.dim == 2


def test_sample_field_matches_psi(one_field):
    g = UniformGrid(-3.0, 3.0, 61)
    fld = analytic.sample_field(one_field, g, 0.4)
    assert np.allclose(fld.to_complex(), one_field.psi(g.axis(), 0.4))


def test_peak_density_bounds(one_field, boson_field):
    g = UniformGrid(-13.0, 13.0, 521)
    for t in (0.0, 0.5, 1.0):
        dens = np.abs(one_field.psi(g.axis(), t)) ** 2
        assert dens.max() <= one_field.peak_density(t) * (1 + 1e-12)
    y1, y2 = UniformGrid(-4.0, 4.0, 161, dim=2).meshgrid()
    dens2 = np.abs(boson_field.psi(y1, y2, 0.5)) ** 2
    assert dens2.max() <= boson_field.peak_density(0.5) * (1 + 1e-12)


def test_continuity_along_exact_flow(one_field):
    # d/dt ln rho along the flow equals -div v
    eps = 1e-5
    for y, t in ((0.9, 0.5), (1.5, 0.8)):
        v = one_field.velocity(y, t)
        lr = lambda yy, tt: 2.0 * one_field.log_amplitude(yy, tt)
        along = (lr(y + eps * v, t + eps) - lr(y - eps * v, t - eps)) \
            / (2 * eps)
        div = (one_field.velocity(y + eps, t)
               - one_field.velocity(y - eps, t)) / (2 * eps)
        assert along == pytest.approx(-div, abs=5e-4)
