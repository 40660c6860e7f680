import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tribrace.drivetrain import (
    SWITCH_LOWER,
    SWITCH_NONE,
    SWITCH_UPPER,
    EncoderModel,
    GearboxParams,
    LimitSwitchSet,
    LinearActuatorParams,
    encoder_read,
    gearbox_output_torque,
    limit_switch_state,
    linear_actuator_step,
    rotary_joint_step,
)
from tribrace.errors import DomainError
from tribrace.kinematics import JointState


class TestGearboxTorque:
    def test_conservative_prototype_estimate(self):
        # 1.765 N*m stall through the 80:1 stage at 38% efficiency
        assert gearbox_output_torque(1.765, 80.0, 0.38) == pytest.approx(53.656, abs=1e-9)

    def test_identity_gearing(self):
        assert gearbox_output_torque(3.21, 1.0, 1.0) == 3.21

    def test_upper_efficiency_bound(self):
        # direct evaluation of the torque law at the 88.2% bound
        assert gearbox_output_torque(1.765, 80.0, 0.882) == pytest.approx(
            1.765 * 80.0 * 0.882, abs=1e-12
        )
        assert gearbox_output_torque(1.765, 80.0, 0.882) == pytest.approx(124.5384, abs=1e-9)

    @pytest.mark.parametrize("eta", [0.0, -0.1, 1.0001, 2.0])
    def test_rejects_bad_efficiency(self, eta):
        with pytest.raises(DomainError):
            gearbox_output_torque(1.0, 80.0, eta)

    def test_rejects_nonpositive_ratio(self):
        with pytest.raises(DomainError):
            gearbox_output_torque(1.0, 0.0, 0.5)

    @settings(max_examples=200, deadline=None)
    @given(
        t=st.floats(0.0, 100.0),
        r=st.floats(0.01, 500.0),
        eta=st.floats(0.01, 0.5),
    )
    def test_linear_in_each_argument(self, t, r, eta):
        base = gearbox_output_torque(t, r, eta)
        assert gearbox_output_torque(2 * t, r, eta) == pytest.approx(2 * base, rel=1e-12)
        assert gearbox_output_torque(t, 2 * r, eta) == pytest.approx(2 * base, rel=1e-12)
        assert gearbox_output_torque(t, r, 2 * eta) == pytest.approx(2 * base, rel=1e-12)

    def test_overall_ratio_is_stage_product(self):
        g = GearboxParams(stage1_ratio=2.0, stage2_ratio=40.0)
        assert g.overall_ratio == 80.0


ACT = LinearActuatorParams()


class TestLinearActuator:
    def test_unloaded_motion(self):
        s = linear_actuator_step(JointState(0.9), 0.01, 0.0, 1.0, ACT)
        assert s.extension == pytest.approx(0.91, abs=1e-12)
        assert s.extension_rate == pytest.approx(0.01, abs=1e-12)

    def test_stall_at_max_push_force(self):
        s = linear_actuator_step(JointState(0.9), 0.01, 1000.0, 1.0, ACT)
        assert s.extension == 0.9
        assert s.extension_rate == 0.0

    def test_clamped_at_full_stroke(self):
        s = linear_actuator_step(JointState(1.124), 0.01, 0.0, 1.0, ACT)
        assert s.extension == pytest.approx(1.125, abs=1e-15)

    def test_retraction_not_stalled_by_load(self):
        s = linear_actuator_step(JointState(0.9), -0.005, 2000.0, 1.0, ACT)
        assert s.extension == pytest.approx(0.895, abs=1e-12)

    def test_speed_saturation(self):
        s = linear_actuator_step(JointState(0.9), 5.0, 0.0, 1.0, ACT)
        assert s.extension == pytest.approx(0.9 + ACT.max_speed, abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(
        loads=st.lists(st.floats(0.0, 2000.0), min_size=1, max_size=30),
        cmd=st.floats(-0.05, 0.05),
    )
    def test_stroke_safety_under_any_sequence(self, loads, cmd):
        s = JointState(0.7)
        for load in loads:
            s = linear_actuator_step(s, cmd, load, 0.5, ACT)
            assert ACT.base_length <= s.extension <= ACT.max_extension

    def test_rate_nonincreasing_in_load(self):
        rates = [
            linear_actuator_step(JointState(0.9), 0.01, load, 1.0, ACT).extension_rate
            for load in (0.0, 500.0, 999.0, 1000.0, 1500.0)
        ]
        assert all(a >= b for a, b in zip(rates, rates[1:]))


GEAR = GearboxParams()


class TestRotaryJoint:
    def test_full_step_in_two_seconds(self):
        s = JointState(0.625, rotation=0.0)
        for _ in range(2000):
            s = rotary_joint_step(s, 1.57, 0.0, 0.001, GEAR, 0.785)
        assert s.rotation == pytest.approx(1.57, abs=1e-9)

    def test_self_locking_hold_is_bit_exact(self):
        s = JointState(0.625, rotation=0.5)
        for k in range(10000):
            torque = 53.0 * math.sin(k * 0.01)  # bounded external load
            s = rotary_joint_step(s, 0.5, torque, 0.001, GEAR, 0.785)
        assert s.rotation == 0.5  # exactly, not approximately

    def test_rate_limited_partial_step(self):
        s = rotary_joint_step(JointState(0.625), 0.1, 0.0, 0.05, GEAR, 0.785)
        assert s.rotation == pytest.approx(0.03925, abs=1e-12)

    def test_backdrive_without_self_locking(self):
        gear = GearboxParams(self_locking=False)
        holding = gearbox_output_torque(gear.motor_stall_torque, gear.overall_ratio, gear.efficiency_eta)
        s = rotary_joint_step(JointState(0.625, rotation=0.5), 0.5, holding + 1.0, 0.01, gear, 0.785)
        assert s.rotation > 0.5
        s = rotary_joint_step(JointState(0.625, rotation=0.5), 0.5, holding - 1.0, 0.01, gear, 0.785)
        assert s.rotation == 0.5

    def test_no_overshoot(self):
        s = JointState(0.625, rotation=1.569)
        s = rotary_joint_step(s, 1.57, 0.0, 0.01, GEAR, 0.785)
        assert s.rotation == 1.57


ENC = EncoderModel()


class TestEncoder:
    def test_half_step_rounds_up(self):
        # 1.57 / 0.02 = 78.5 exactly in binary floating point
        assert encoder_read(1.57, ENC) == pytest.approx(1.58, abs=1e-12)

    def test_zero(self):
        assert encoder_read(0.0, ENC) == 0.0

    def test_exhaustive_rounding_rule(self):
        # oracle: for every tick k, angles in [kq - q/2, kq + q/2) read kq
        q = ENC.quantization_step
        for k in range(-200, 201):
            low = k * q - q / 2
            high = k * q + q / 2
            assert encoder_read(low + 1e-12, ENC) == pytest.approx(k * q, abs=1e-9)
            assert encoder_read(high - 1e-12, ENC) == pytest.approx(k * q, abs=1e-9)

    def test_random_sweep_error_bound(self):
        import random

        rng = random.Random(1234)
        worst = max(
            abs(encoder_read(a, ENC) - a)
            for a in (rng.uniform(-math.pi, math.pi) for _ in range(10_000))
        )
        assert worst <= 0.01

    @settings(max_examples=500, deadline=None)
    @given(st.floats(-10.0, 10.0), st.sampled_from([0.01, 0.02, 0.05]))
    def test_quantizer_bound_property(self, angle, q):
        model = EncoderModel(quantization_step=q)
        assert abs(encoder_read(angle, model) - angle) <= q / 2 + 1e-12


class TestLimitSwitches:
    SW = LimitSwitchSet(lower_trip_angle=-math.pi / 2, upper_trip_angle=math.pi / 2)

    def test_interior(self):
        assert limit_switch_state(0.0, self.SW) == SWITCH_NONE

    def test_upper_boundary_inclusive(self):
        assert limit_switch_state(math.pi / 2, self.SW) == SWITCH_UPPER

    def test_past_lower_limit(self):
        assert limit_switch_state(-1.58, self.SW) == SWITCH_LOWER

    def test_rejects_inverted_trip_angles(self):
        with pytest.raises(ValueError):
            LimitSwitchSet(lower_trip_angle=1.0, upper_trip_angle=-1.0)
