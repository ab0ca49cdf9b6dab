"""Closed-form magnetostatics against independent numerical oracles."""

import math

import numpy as np
import pytest

from millibots.constants import MU0_OVER_4PI
from millibots.errors import (
    InvalidConfigurationError,
    InvalidSpecError,
    SingularityError,
)
from millibots.magnetics import (
    MAGIC_ANGLE_DEG,
    DEFAULT_MAGNET,
    Dipole,
    MagnetSpec,
    dipole_field,
    dipole_pair_force,
    force_on_dipole,
    magnetic_moment,
    pair_interaction,
    required_field,
    torque_on_dipole,
)

M = DEFAULT_MAGNET.moment_magnitude


class TestMagnetSpec:
    def test_volume_exact(self):
        spec = MagnetSpec()
        assert spec.volume == pytest.approx((4.0 / 3.0) * math.pi * 0.5e-3**3, rel=1e-15)

    def test_moment_matches_reference_value(self):
        # datasheet arithmetic rounds intermediates to 5.164e-4
        assert magnetic_moment(MagnetSpec()) == pytest.approx(5.164e-4, rel=5e-3)

    def test_zero_magnetization_rejected(self):
        with pytest.raises(InvalidSpecError):
            MagnetSpec(magnetization=0.0)
        with pytest.raises(InvalidSpecError):
            MagnetSpec(radius=-1e-3)

    def test_moment_scales_with_radius_cubed(self):
        base = magnetic_moment(MagnetSpec(radius=0.5e-3))
        assert magnetic_moment(MagnetSpec(radius=1.0e-3)) == pytest.approx(
            8.0 * base, rel=1e-12
        )


class TestTorque:
    def test_perpendicular(self):
        d = Dipole(position=np.zeros(2), moment=[M, 0.0])
        tau = torque_on_dipole(d, [0.0, 1.5e-3])
        assert tau[2] == pytest.approx(M * 1.5e-3, rel=1e-12)
        assert tau[2] == pytest.approx(7.746e-7, rel=1e-3)

    def test_aligned_and_antialigned_zero(self):
        d = Dipole(position=np.zeros(2), moment=[M, 0.0])
        assert np.allclose(torque_on_dipole(d, [2e-3, 0.0]), 0.0)
        assert np.allclose(torque_on_dipole(d, [-2e-3, 0.0]), 0.0)

    def test_bilinear(self, rng):
        for _ in range(50):
            m = rng.normal(size=3)
            b = rng.normal(size=3)
            a, c = rng.uniform(0.1, 5.0, 2)
            t1 = torque_on_dipole(Dipole(np.zeros(3), a * m), c * np.asarray(b))
            t0 = torque_on_dipole(Dipole(np.zeros(3), m), b)
            assert np.allclose(t1, a * c * t0, rtol=1e-12)


class TestForce:
    def test_uniform_field_no_force(self):
        d = Dipole(position=np.zeros(2), moment=[M, 0.0])
        assert np.allclose(force_on_dipole(d, np.zeros((2, 2))), 0.0)

    def test_axial_gradient(self):
        d = Dipole(position=np.zeros(2), moment=[M, 0.0])
        g = np.array([[0.1, 0.0], [0.0, 0.0]])
        f = force_on_dipole(d, g)
        assert f[0] == pytest.approx(M * 0.1, rel=1e-12)
        assert f[1] == 0.0

    def test_matches_finite_difference_of_potential(self, rng):
        # oracle: F = -grad(-m . B) via central differences on the coil model
        from millibots.coils import CoilCommand, DEFAULT_SYSTEM

        cmd = CoilCommand(1.0, -0.7, 0.5, 0.9)
        moment = np.array([0.4 * M, -0.8 * M, 0.0])
        h = 1e-6
        for _ in range(20):
            r = rng.uniform(-0.01, 0.01, 3)
            r[2] = 0.0
            grad = DEFAULT_SYSTEM.field_at(cmd, r).gradient
            f = force_on_dipole(Dipole(r, moment), grad)
            num = np.zeros(3)
            for ax in range(3):
                dr = np.zeros(3)
                dr[ax] = h
                bp = DEFAULT_SYSTEM.field_at(cmd, r + dr).total
                bm = DEFAULT_SYSTEM.field_at(cmd, r - dr).total
                num[ax] = np.dot(moment, bp - bm) / (2.0 * h)
            assert np.allclose(f, num, rtol=1e-6, atol=1e-12)


class TestDipoleField:
    def test_perpendicular_bisector_magnitudes(self):
        src = Dipole(position=np.zeros(3), moment=[0.0, M, 0.0])
        b = dipole_field(src, [3.2e-3, 0.0, 0.0])
        assert np.linalg.norm(b) == pytest.approx(1.58e-3, rel=5e-3)
        b = dipole_field(src, [1.6e-3, 0.0, 0.0])
        assert np.linalg.norm(b) == pytest.approx(12.6e-3, rel=5e-3)

    def test_inverse_cube_scaling(self):
        src = Dipole(position=np.zeros(3), moment=[0.0, M, 0.0])
        b1 = np.linalg.norm(dipole_field(src, [2e-3, 0.0, 0.0]))
        b2 = np.linalg.norm(dipole_field(src, [4e-3, 0.0, 0.0]))
        assert b1 == pytest.approx(8.0 * b2, rel=1e-12)

    def test_zero_separation_raises(self):
        src = Dipole(position=np.zeros(3), moment=[0.0, M, 0.0])
        with pytest.raises(SingularityError):
            dipole_field(src, np.zeros(3))

    def test_divergence_and_curl_vanish(self, rng):
        src = Dipole(position=np.zeros(3), moment=rng.normal(size=3) * M)
        h = 1e-7
        for _ in range(40):
            r = rng.uniform(-8e-3, 8e-3, 3)
            dist = np.linalg.norm(r)
            if dist < 2.0 * DEFAULT_MAGNET.radius:
                continue
            jac = np.zeros((3, 3))
            for ax in range(3):
                dr = np.zeros(3)
                dr[ax] = h
                jac[:, ax] = (dipole_field(src, r + dr) - dipole_field(src, r - dr)) / (
                    2.0 * h
                )
            scale = np.linalg.norm(dipole_field(src, r)) / dist
            div = abs(np.trace(jac))
            curl = np.array(
                [jac[2, 1] - jac[1, 2], jac[0, 2] - jac[2, 0], jac[1, 0] - jac[0, 1]]
            )
            assert div < 1e-6 * scale
            assert np.max(np.abs(curl)) < 1e-6 * scale

    def test_finite_size_volume_oracle(self, rng):
        # brute force: integrate the sphere as a cloud of sub-dipoles; the
        # point-dipole field must match outside the magnet
        spec = DEFAULT_MAGNET
        n = 12
        xs = (np.arange(n) + 0.5) / n * 2.0 * spec.radius - spec.radius
        pts = np.array([(x, y, z) for x in xs for y in xs for z in xs])
        pts = pts[np.linalg.norm(pts, axis=1) <= spec.radius]
        sub_moment = spec.moment_magnitude / len(pts)
        src = Dipole(position=np.zeros(3), moment=[0.0, 0.0, M])
        for r in ([2.5e-3, 0.0, 0.0], [1.5e-3, 1.0e-3, 0.5e-3]):
            total = np.zeros(3)
            for p in pts:
                total += dipole_field(
                    Dipole(position=p, moment=[0.0, 0.0, sub_moment]), r
                )
            point = dipole_field(src, r)
            assert np.allclose(total, point, rtol=2e-2)


class TestPairInteraction:
    def test_magic_angle_zero(self):
        from millibots.magnetics import MAGIC_ANGLE_RAD

        scale = 3.0 * MU0_OVER_4PI * M * M / 3e-3**4
        exact = pair_interaction(M, M, 3e-3, MAGIC_ANGLE_RAD)
        assert abs(exact.radial_force) < 1e-12 * scale
        rounded = pair_interaction(M, M, 3e-3, math.radians(54.7356))
        assert abs(rounded.radial_force) < 1e-5 * scale

    def test_magic_angle_bracketing(self, rng):
        for _ in range(20):
            m1, m2 = rng.uniform(1e-5, 1e-2, 2)
            r = rng.uniform(1e-3, 1e-2)
            assert pair_interaction(m1, m2, r, math.radians(54.6)).radial_force < 0.0
            assert pair_interaction(m1, m2, r, math.radians(54.9)).radial_force > 0.0

    def test_head_to_tail_attraction_magnitude(self):
        pi = pair_interaction(M, M, 3e-3, 0.0)
        expected = -2.0 * 3.0 * MU0_OVER_4PI * M * M / 3e-3**4
        assert pi.radial_force == pytest.approx(expected, rel=1e-12)

    def test_tangential_zero_at_90deg(self):
        for r in (1e-3, 5e-3):
            assert pair_interaction(M, M, r, math.pi / 2.0).tangential_force == (
                pytest.approx(0.0, abs=1e-12)
            )

    def test_energy_gradient_consistency(self, rng):
        # F_r = -dU/dr by central differences, 100 random samples
        for _ in range(100):
            r = rng.uniform(1e-3, 1e-2)
            theta = rng.uniform(0.0, math.pi)
            h = r * 1e-5
            up = pair_interaction(M, M, r + h, theta).energy
            dn = pair_interaction(M, M, r - h, theta).energy
            fd = -(up - dn) / (2.0 * h)
            f = pair_interaction(M, M, r, theta).radial_force
            if abs(fd) > 1e-18:
                assert f == pytest.approx(fd, rel=1e-6)

    def test_zero_separation_raises(self):
        with pytest.raises(SingularityError):
            pair_interaction(M, M, 0.0, 0.0)

    def test_magic_angle_brute_force_sweep(self):
        # locate the sign change by scanning theta in 0.01 deg steps
        thetas = np.arange(0.0, 90.0, 0.01)
        fr = np.array(
            [pair_interaction(M, M, 3e-3, math.radians(t)).radial_force for t in thetas]
        )
        crossing = np.where(np.diff(np.sign(fr)) > 0)[0]
        assert len(crossing) == 1
        found = thetas[crossing[0]]
        assert abs(found - 54.74) <= 0.02
        assert abs(MAGIC_ANGLE_DEG - 54.7356) < 1e-4


class TestVectorPairForce:
    def test_reduces_to_parallel_decomposition(self, rng):
        for _ in range(50):
            theta = rng.uniform(0.0, math.pi)
            r = rng.uniform(1e-3, 1e-2)
            direction = np.array([math.cos(theta), math.sin(theta), 0.0])
            m_vec = M * direction
            f = dipole_pair_force(m_vec, m_vec, [r, 0.0, 0.0])
            pi = pair_interaction(M, M, r, theta)
            assert f[0] == pytest.approx(pi.radial_force, rel=1e-9, abs=1e-18)
            assert f[1] == pytest.approx(pi.tangential_force, rel=1e-9, abs=1e-18)

    def test_newton_third_law(self, rng):
        m1 = rng.normal(size=3) * M
        m2 = rng.normal(size=3) * M
        r = np.array([2e-3, 1e-3, 0.0])
        f12 = dipole_pair_force(m1, m2, r)
        f21 = dipole_pair_force(m2, m1, -r)
        assert np.allclose(f12, -f21, rtol=1e-12)


class TestRequiredField:
    def test_named_cases(self):
        assert required_field("chain_to_gripper") == pytest.approx(1.58e-3, rel=5e-3)
        assert required_field("chain_to_square") == pytest.approx(1.91e-3, rel=5e-3)
        assert required_field("disassembly") == pytest.approx(12.6e-3, rel=5e-3)

    def test_custom_separation(self):
        assert required_field(3.2e-3) == pytest.approx(
            required_field("chain_to_gripper"), rel=1e-12
        )

    def test_monotone_decreasing_inverse_cube(self, rng):
        for _ in range(20):
            d = rng.uniform(1e-3, 8e-3)
            assert required_field(2.0 * d) == pytest.approx(
                required_field(d) / 8.0, rel=1e-12
            )
            assert required_field(d * 1.01) < required_field(d)

    def test_bad_inputs(self):
        with pytest.raises(InvalidConfigurationError):
            required_field("chain_to_pretzel")
        with pytest.raises(InvalidConfigurationError):
            required_field(0.0)
        with pytest.raises(InvalidConfigurationError):
            required_field(-2e-3)
