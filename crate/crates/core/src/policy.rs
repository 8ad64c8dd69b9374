//! Turning predictions into robot commands.
//!
//! The learned policy proceeds while the predicted time to the next bite is
//! at or below the user's threshold and commits to finishing the approach
//! once the spoon is within 5 cm of the mouth. The fixed-interval,
//! mouth-open and always-feed baselines live here too.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::Prediction;

/// Distance below which the approach is always completed.
pub const COMMIT_DISTANCE_M: f64 = 0.05;
pub const FIXED_INTERVAL_S: f64 = 45.0;
pub const THRESHOLD_SET_S: [f64; 5] = [4.0, 5.0, 6.0, 7.0, 8.0];
pub const DEFAULT_LEVEL: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Proceed,
    Stop,
    TriggerFullTrajectory,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Proceed => "proceed",
            Command::Stop => "stop",
            Command::TriggerFullTrajectory => "trigger_full_trajectory",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Assertiveness threshold in seconds and its 1 (least) .. 5 (most) level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssertivenessThreshold {
    pub tau: f64,
    pub mapped_level: u8,
}

impl AssertivenessThreshold {
    pub fn from_tau(tau: f64) -> Result<Self> {
        THRESHOLD_SET_S
            .iter()
            .position(|&t| t == tau)
            .map(|i| Self {
                tau,
                mapped_level: i as u8 + 1,
            })
            .ok_or_else(|| Error::Domain(format!("threshold {tau} s is not one of 4..8 s")))
    }
}

/// Level `l` in 1..=5 maps to `tau = l + 3` seconds.
pub fn map_assertiveness(level: u8) -> Result<AssertivenessThreshold> {
    if !(1..=5).contains(&level) {
        return Err(Error::Domain(format!("assertiveness level {level} outside 1..=5")));
    }
    Ok(AssertivenessThreshold {
        tau: f64::from(level) + 3.0,
        mapped_level: level,
    })
}

/// Proceed iff `y_hat <= tau`. Non-finite predictions stop the robot.
pub fn decide(y_hat: Prediction, tau: f64) -> Command {
    decide_with_diagnostic(y_hat, tau).0
}

/// Like [`decide`], also reporting why a non-finite prediction was rejected.
pub fn decide_with_diagnostic(y_hat: Prediction, tau: f64) -> (Command, Option<String>) {
    if !y_hat.y_hat.is_finite() {
        return (Command::Stop, Some(format!("non-finite prediction {}", y_hat.y_hat)));
    }
    if y_hat.y_hat <= tau {
        (Command::Proceed, None)
    } else {
        (Command::Stop, None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyContext {
    pub distance_to_mouth: f64,
    pub committed: bool,
    pub session_clock: f64,
}

impl PolicyContext {
    pub fn new(distance_to_mouth: f64, session_clock: f64) -> Self {
        Self {
            distance_to_mouth,
            committed: false,
            session_clock,
        }
    }

    /// Clears the commit latch once the bite is complete.
    pub fn bite_completed(self) -> Self {
        Self {
            committed: false,
            ..self
        }
    }
}

/// Thresholding with the 5 cm commit rule.
pub fn waffle_step(ctx: PolicyContext, y_hat: Prediction, thr: AssertivenessThreshold) -> (Command, PolicyContext) {
    if ctx.committed || ctx.distance_to_mouth <= COMMIT_DISTANCE_M {
        return (
            Command::Proceed,
            PolicyContext {
                committed: true,
                ..ctx
            },
        );
    }
    (decide(y_hat, thr.tau), ctx)
}

/// Control period of the 2 Hz command stream.
pub const CONTROL_DT: f64 = 0.5;

/// Triggers a full trajectory at every positive multiple of `interval`
/// (within half a control tick), otherwise stops.
pub fn fixed_interval_step(session_clock: f64, interval: f64) -> Command {
    if !(interval > 0.0) || session_clock < interval - CONTROL_DT / 2.0 {
        return Command::Stop;
    }
    let phase = session_clock / interval;
    let nearest = phase.round();
    if ((phase - nearest) * interval).abs() < CONTROL_DT / 2.0 {
        Command::TriggerFullTrajectory
    } else {
        Command::Stop
    }
}

/// Triggers a full trajectory when a mouth-open event arrives.
pub fn mouth_open_step(event: Option<f64>) -> Command {
    match event {
        Some(_) => Command::TriggerFullTrajectory,
        None => Command::Stop,
    }
}

pub fn always_feed_step() -> Command {
    Command::Proceed
}

/// Which controller drives the robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Waffle,
    FixedInterval,
    MouthOpen,
    AlwaysFeed,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Waffle => "waffle",
            PolicyKind::FixedInterval => "fixed-interval",
            PolicyKind::MouthOpen => "mouth-open",
            PolicyKind::AlwaysFeed => "always-feed",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "waffle" => Ok(PolicyKind::Waffle),
            "fixed-interval" => Ok(PolicyKind::FixedInterval),
            "mouth-open" => Ok(PolicyKind::MouthOpen),
            "always-feed" => Ok(PolicyKind::AlwaysFeed),
            other => Err(Error::Config(format!(
                "unknown policy {other:?} (expected waffle, fixed-interval, mouth-open or always-feed)"
            ))),
        }
    }
}
