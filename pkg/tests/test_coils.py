"""Coil model against a numerical Biot-Savart oracle and its own structure."""

import math

import numpy as np
import pytest

from millibots.coils import (
    CoilCommand,
    CoilSpec,
    CoilSystem,
    DEFAULT_COILS,
    WorkspaceBoundsWarning,
    calibration_constants,
    load_calibration_file,
)
from millibots.constants import MU0
from millibots.errors import InfeasibleTargetError, InvalidSpecError


def biot_savart_loop(radius, center_z, current, at, segments=720):
    """Numerically integrate one circular loop in the z = center_z plane."""
    phi = (np.arange(segments) + 0.5) / segments * 2.0 * np.pi
    pts = np.stack(
        [radius * np.cos(phi), radius * np.sin(phi), np.full(segments, center_z)],
        axis=1,
    )
    dl = np.stack(
        [-radius * np.sin(phi), radius * np.cos(phi), np.zeros(segments)], axis=1
    ) * (2.0 * np.pi / segments)
    r_vec = np.asarray(at) - pts
    r_mag = np.linalg.norm(r_vec, axis=1)
    db = np.cross(dl, r_vec) / r_mag[:, None] ** 3
    return MU0 * current / (4.0 * np.pi) * db.sum(axis=0)


class TestCalibration:
    def test_helmholtz_constant_vs_biot_savart(self):
        # two co-directional 100-turn loops spaced one radius apart
        spec = DEFAULT_COILS["Hx"]
        r = spec.radius
        b = biot_savart_loop(r, -r / 2.0, 1.0, [0.0, 0.0, 0.0]) + biot_savart_loop(
            r, r / 2.0, 1.0, [0.0, 0.0, 0.0]
        )
        numeric = spec.turns * b[2]
        k = calibration_constants()["k_Hx"]
        assert k == pytest.approx(numeric, rel=1e-2)
        assert k == pytest.approx(1.80e-3, rel=5e-3)

    def test_hy_matches_hx_by_turn_density(self):
        ks = calibration_constants()
        assert ks["k_Hy"] == pytest.approx(1.80e-3, rel=5e-3)
        assert ks["k_Hy"] == pytest.approx(ks["k_Hx"], rel=1e-6)

    def test_maxwell_gradient_vs_biot_savart(self):
        spec = DEFAULT_COILS["Mx"]
        r = spec.radius
        a = math.sqrt(3.0) * r / 2.0

        def bz(z):
            up = biot_savart_loop(r, a, 1.0, [0.0, 0.0, z])
            dn = biot_savart_loop(r, -a, -1.0, [0.0, 0.0, z])
            return spec.turns * (up[2] + dn[2])

        h = 1e-4
        numeric = (bz(h) - bz(-h)) / (2.0 * h)
        assert calibration_constants()["k_Mx"] == pytest.approx(numeric, rel=1e-2)

    def test_zero_turns_zero_constant(self):
        specs = dict(DEFAULT_COILS)
        specs["Hx"] = CoilSpec("Hx", 0.100, 0.050, 0)
        assert calibration_constants(specs)["k_Hx"] == 0.0

    def test_helmholtz_spacing_equals_radius(self):
        for name in ("Hx", "Hy"):
            spec = DEFAULT_COILS[name]
            assert spec.spacing == pytest.approx(spec.radius, rel=1e-9)

    def test_maxwell_spacing_near_sqrt3_radius(self):
        for name in ("Mx", "My"):
            spec = DEFAULT_COILS[name]
            assert spec.spacing == pytest.approx(math.sqrt(3.0) * spec.radius, rel=0.02)


class TestFieldAt:
    def test_origin_sees_uniform_only(self):
        sys = CoilSystem()
        s = sys.field_at(CoilCommand(1.0, 2.0, 3.0, -1.0), [0.0, 0.0, 0.0])
        assert np.allclose(s.total[:2], s.uniform)
        assert s.total[2] == 0.0

    def test_all_zero_currents(self):
        sys = CoilSystem()
        s = sys.field_at(CoilCommand(), [5e-3, -5e-3, 0.0])
        assert np.allclose(s.total, 0.0)

    def test_uniform_plus_gradient_arithmetic(self):
        sys = CoilSystem()
        cmd = sys.currents_for((1.5e-3, 0.0), (0.05, 0.0))
        s = sys.field_at(cmd, [10e-3, 0.0, 0.0])
        assert s.total[0] == pytest.approx(1.5e-3 + 0.05 * 10e-3, rel=1e-9)
        assert s.total[0] == pytest.approx(2.0e-3, rel=1e-9)

    def test_gradient_matrix_structure(self, rng):
        sys = CoilSystem()
        for _ in range(20):
            cmd = CoilCommand(*rng.uniform(-5, 5, 4))
            s = sys.field_at(cmd, [0.0, 0.0, 0.0])
            g = s.gradient
            assert abs(np.trace(g)) < 1e-15
            assert np.count_nonzero(g - np.diag(np.diag(g))) == 0
            gx = sys.k_mx * cmd.i_mx
            gy = sys.k_my * cmd.i_my
            assert g[0, 0] == pytest.approx(gx - gy / 2.0, rel=1e-12, abs=1e-18)
            assert g[1, 1] == pytest.approx(-gx / 2.0 + gy, rel=1e-12, abs=1e-18)
            assert g[2, 2] == pytest.approx(-(gx + gy) / 2.0, rel=1e-12, abs=1e-18)

    def test_linearity(self, rng):
        sys = CoilSystem()
        for _ in range(50):
            i = rng.uniform(-5, 5, 4)
            alpha = rng.uniform(0.1, 1.9)
            r = rng.uniform(-0.015, 0.015, 3)
            b1 = sys.field_at(CoilCommand(*i), r).total
            b2 = sys.field_at(CoilCommand(*(alpha * i)), r).total
            assert np.allclose(b2, alpha * b1, rtol=1e-12, atol=1e-20)

    def test_z_field_zero_in_plane(self, rng):
        sys = CoilSystem()
        for _ in range(20):
            cmd = CoilCommand(*rng.uniform(-10, 10, 4))
            r = np.array([rng.uniform(-0.017, 0.017), rng.uniform(-0.017, 0.017), 0.0])
            assert sys.field_at(cmd, r).total[2] == 0.0

    def test_out_of_workspace_warns_but_evaluates(self):
        sys = CoilSystem()
        with pytest.warns(WorkspaceBoundsWarning):
            s = sys.field_at(CoilCommand(1.0, 0, 0, 0), [0.030, 0.0, 0.0])
        assert np.isfinite(s.total).all()
        assert not s.in_bounds

    def test_current_clipping_sets_flag(self):
        sys = CoilSystem()
        s = sys.field_at(CoilCommand(50.0, 0, 0, 0), [0.0, 0.0, 0.0])
        assert s.saturated
        assert s.uniform[0] == pytest.approx(sys.k_hx * 10.0, rel=1e-12)

    def test_numerical_divergence_zero(self, rng):
        sys = CoilSystem()
        h = 1e-5
        for _ in range(30):
            cmd = CoilCommand(*rng.uniform(-10, 10, 4))
            r = rng.uniform(-0.015, 0.015, 3)
            div = 0.0
            for ax in range(3):
                dr = np.zeros(3)
                dr[ax] = h
                div += (
                    sys.field_at(cmd, r + dr).total[ax]
                    - sys.field_at(cmd, r - dr).total[ax]
                ) / (2.0 * h)
            assert abs(div) < 1e-9


class TestCurrentsFor:
    def test_round_trip(self, rng):
        sys = CoilSystem()
        for _ in range(50):
            b = rng.uniform(-8e-3, 8e-3, 2)
            g = rng.uniform(-0.2, 0.2, 2)
            cmd = sys.currents_for(b, g)
            s = sys.field_at(cmd, [0.0, 0.0, 0.0])
            assert np.allclose(s.uniform, b, rtol=1e-12, atol=1e-20)

    def test_example_current(self):
        sys = CoilSystem()
        cmd = sys.currents_for((1.5e-3, 0.0))
        assert cmd.i_hx == pytest.approx(0.833, rel=2e-3)
        assert cmd.i_hy == cmd.i_mx == cmd.i_my == 0.0

    def test_zero_target(self):
        cmd = CoilSystem().currents_for((0.0, 0.0))
        assert cmd.currents() == (0.0, 0.0, 0.0, 0.0)

    def test_infeasible_names_limiting_coil(self):
        sys = CoilSystem()
        with pytest.raises(InfeasibleTargetError) as err:
            sys.currents_for((100e-3, 0.0))
        assert err.value.limiting_coil == "Hx"

    def test_ceiling_covers_disassembly(self):
        sys = CoilSystem()
        assert sys.max_uniform_field() > 12.7e-3
        sys.currents_for((0.0, 13e-3))  # must not raise


class TestCalibrationFile:
    def test_load_and_apply(self, tmp_path):
        path = tmp_path / "cal.txt"
        path.write_text(
            "# bench calibration\n"
            "k_Hx = 2.0e-3 T/A\n"
            "k_My = 2.5e-2 T/m/A\n"
        )
        overrides = load_calibration_file(path)
        assert overrides == {"k_Hx": 2.0e-3, "k_My": 2.5e-2}
        sys = CoilSystem(calibration=overrides)
        assert sys.k_hx == 2.0e-3
        assert sys.k_hy == pytest.approx(1.80e-3, rel=5e-3)

    def test_rejects_unknown_key_and_bad_units(self, tmp_path):
        path = tmp_path / "cal.txt"
        path.write_text("k_Qz = 1.0 T/A\n")
        with pytest.raises(InvalidSpecError):
            load_calibration_file(path)
        path.write_text("k_Hx = 1.0 mT/A\n")
        with pytest.raises(InvalidSpecError):
            load_calibration_file(path)
