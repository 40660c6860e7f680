"""Planar simulator and analysis toolkit for a tri-leg self-bracing drilling robot."""

from .controller import (
    CommandSet,
    ControllerConfig,
    ControllerState,
    SensorSnapshot,
    fsm_step,
)
from .drivetrain import (
    DrivetrainParams,
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
from .environment import (
    ContactParams,
    ContactState,
    DrillParams,
    EnvironmentParams,
    TunnelCrossSection,
    contact_force,
    drill_reaction,
    friction_force,
    signed_penetration,
    static_equilibrium,
)
from .errors import (
    ConfigError,
    DomainError,
    GeometryError,
    LimitViolation,
    NumericalError,
    SolverError,
    TribraceError,
)
from .kinematics import (
    Annulus,
    JointState,
    RobotConfiguration,
    RobotParams,
    WorkspaceRegion,
    chain_residual,
    closed_chain_solve,
    forward_tip_positions,
    leg_annulus,
    workspace_region,
)
from .scenario import Scenario, load_scenario, parse_scenario
from .simulator import (
    SimConfig,
    SimLogRecord,
    force_ratios,
    integrate_step,
    run_scenario,
    run_step_response,
    run_tension_test,
)

__version__ = "0.1.0"
