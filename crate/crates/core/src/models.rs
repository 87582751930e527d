//! Example models shipped with the crate.

/// Thrown ball bouncing off a wall and the floor, hit by a random player.
pub const BALL: &str = include_str!("../../../models/ball.sha");

/// Two rooms sharing one stochastic heater.
pub const ROOMS: &str = include_str!("../../../models/rooms.sha");

/// Genetic oscillator, deterministic ODE formulation.
pub const OSCILLATOR: &str = include_str!("../../../models/oscillator.sha");

/// Genetic oscillator, stochastic reaction network formulation.
pub const OSCILLATOR_STOCHASTIC: &str = include_str!("../../../models/oscillator_stochastic.sha");

/// All bundled models by file stem.
pub const ALL: &[(&str, &str)] = &[
    ("ball", BALL),
    ("rooms", ROOMS),
    ("oscillator", OSCILLATOR),
    ("oscillator_stochastic", OSCILLATOR_STOCHASTIC),
];
