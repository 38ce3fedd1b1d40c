"""Distributed formation control of manipulator end-effectors.

Thin wrapper over the compiled core: rigidity graphs, two- and three-joint arm
models, the exact/approximate/adaptive task-space controllers, the fixed-step
network simulator and the Lyapunov gain-certificate estimator.
"""

from ._core import (  # noqa: F401
    CertificateReport,
    ControlResult,
    Controller,
    Flavor,
    FormationGraph,
    GainCondition,
    Gains,
    GravityMode,
    GridSpec,
    Manipulator,
    Network,
    PlanarArmParams,
    PlanarTwoLink,
    RunResult,
    Scenario,
    ScenarioError,
    SimConfig,
    SpatialArmParams,
    SpatialThreeLink,
    Trace,
    Variant,
    estimate_certificate,
    format_report,
    load_scenario,
    parse_scenario,
    read_trace,
    simulate,
    write_plots,
    write_trace,
)

__all__ = [name for name in dir() if not name.startswith("_")]
