"""Shared physical constants and module geometry.

All quantities are SI (meters, tesla, amperes). Millimeter/millitesla
conversions happen only at file-format and CLI boundaries.
"""

import math

MU0 = 4.0 * math.pi * 1e-7  # vacuum permeability, T*m/A
MU0_OVER_4PI = 1e-7  # exact in SI by definition of mu0

# Default magnet: N40 sphere, 1 mm diameter, embedded in every module.
MAGNET_RADIUS = 0.5e-3  # m
MAGNETIZATION = 986760.0  # A/m

# Cube module geometry.
CUBE_EDGE = 3.0e-3  # m
CONTACT_DIST = CUBE_EDGE  # center-to-center at face contact

# Internal cavity housing the magnet, per module type. The magnet can slide
# (cavity - diameter) / 2 from the cube center toward a bonded neighbor.
CAVITY = {"free": 2.4e-3, "fixed": 1.2e-3, "gripper": 2.0e-3}

# Magnet in-cavity slack in integer micrometers. Kept integral so bond gaps
# combine exactly and field thresholds reproduce bit-for-bit.
SLACK_UM = {"free": 700, "fixed": 100, "gripper": 500}
CONTACT_UM = 3000

# Magnet separations for the three named reconfiguration cases (micrometers).
RECONFIG_GAP_UM = {
    "chain_to_gripper": 3200,
    "chain_to_square": 3000,
    "disassembly": 1600,
}

# Workspace: 35 x 35 mm centered on the coil axis intersection.
WORKSPACE_HALF = 17.5e-3  # m

MODULE_TYPES = ("free", "fixed", "gripper")


def magnet_slack(mtype: str) -> float:
    """In-cavity travel of the magnet center from the cube center, in meters."""
    return SLACK_UM[mtype] * 1e-6
