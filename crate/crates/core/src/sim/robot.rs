//! Tick-driven feeding-robot trajectory state machine.
//!
//! The robot cycles Acquiring -> AtStaging -> Approaching -> AtFeeding ->
//! Returning -> Acquiring. Only the staging-to-mouth segment is steerable:
//! every other phase runs on a timer and ignores proceed/stop commands.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataio::BiteEvent;
use crate::error::{Error, Result};
use crate::policy::{Command, CONTROL_DT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Acquiring,
    AtStaging,
    Approaching,
    AtFeeding,
    Returning,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Acquiring => "acquiring",
            Phase::AtStaging => "at_staging",
            Phase::Approaching => "approaching",
            Phase::AtFeeding => "at_feeding",
            Phase::Returning => "returning",
        }
    }

    pub fn next(self) -> Phase {
        match self {
            Phase::Acquiring => Phase::AtStaging,
            Phase::AtStaging => Phase::Approaching,
            Phase::Approaching => Phase::AtFeeding,
            Phase::AtFeeding => Phase::Returning,
            Phase::Returning => Phase::Acquiring,
        }
    }

    /// Phases in which proceed/stop commands steer the robot.
    pub fn is_steerable(self) -> bool {
        matches!(self, Phase::AtStaging | Phase::Approaching)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Trajectory timing and geometry. Robot speed and phase durations are not
/// known for the original hardware; the defaults only need to make the
/// 4..8 s threshold range meaningful.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    /// Staging point to mouth, meters (15 in).
    pub staging_distance: f64,
    /// m/s while proceeding.
    pub approach_speed: f64,
    pub acquire_duration: f64,
    pub bite_duration: f64,
    pub return_duration: f64,
    pub control_dt: f64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            staging_distance: 0.381,
            approach_speed: 0.05,
            acquire_duration: 4.0,
            bite_duration: 2.0,
            return_duration: 2.0,
            control_dt: CONTROL_DT,
        }
    }
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.staging_distance,
            self.approach_speed,
            self.acquire_duration,
            self.bite_duration,
            self.return_duration,
            self.control_dt,
        ];
        if vals.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::Config(format!("trajectory parameters must be positive: {self:?}")))
        }
    }

    /// Whole ticks needed to cover `seconds` (at least one).
    pub fn ticks(&self, seconds: f64) -> u32 {
        ((seconds / self.control_dt) - 1e-9).ceil().max(1.0) as u32
    }

    pub fn step_distance(&self) -> f64 {
        self.approach_speed * self.control_dt
    }

    /// Ticks of uninterrupted proceeding from staging to mouth.
    pub fn approach_ticks(&self) -> u32 {
        ((self.staging_distance / self.step_distance()) - 1e-9).ceil().max(1.0) as u32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub phase: Phase,
    pub distance_to_mouth: f64,
    pub clock: f64,
    pub tick: u64,
    /// Remaining ticks of a timed phase.
    pub ticks_left: u32,
    /// Set by a full-trajectory trigger; proceeds regardless of commands.
    pub auto_proceed: bool,
    pub staging_arrival_t: Option<f64>,
    pub feeding_arrival_t: Option<f64>,
}

impl RobotState {
    /// Session start: acquiring the first bite, clock 0.
    pub fn start(cfg: &TrajectoryConfig) -> Self {
        Self {
            phase: Phase::Acquiring,
            distance_to_mouth: cfg.staging_distance,
            clock: 0.0,
            tick: 0,
            ticks_left: cfg.ticks(cfg.acquire_duration),
            auto_proceed: false,
            staging_arrival_t: None,
            feeding_arrival_t: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RobotEvent {
    StagingArrival { t: f64 },
    FeedingArrival { t: f64 },
    BiteComplete(BiteEvent),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: RobotState,
    pub event: Option<RobotEvent>,
    /// Whether the spoon moved toward the mouth during this tick.
    pub advanced: bool,
}

/// Applies one control tick.
pub fn step_robot(state: &RobotState, cmd: Command, cfg: &TrajectoryConfig) -> Result<StepOutcome> {
    let mut s = state.clone();
    s.tick += 1;
    s.clock = s.tick as f64 * cfg.control_dt;
    let mut event = None;
    let mut advanced = false;

    if cmd == Command::TriggerFullTrajectory && !s.phase.is_steerable() {
        return Err(Error::Protocol(format!(
            "full-trajectory trigger at t = {} while robot is {}",
            state.clock, state.phase
        )));
    }

    match s.phase {
        Phase::Acquiring => {
            s.ticks_left -= 1;
            if s.ticks_left == 0 {
                s.phase = Phase::AtStaging;
                s.distance_to_mouth = cfg.staging_distance;
                s.staging_arrival_t = Some(s.clock);
                event = Some(RobotEvent::StagingArrival { t: s.clock });
            }
        }
        Phase::AtStaging | Phase::Approaching => {
            if cmd == Command::TriggerFullTrajectory {
                s.auto_proceed = true;
            }
            let moving = cmd == Command::Proceed || s.auto_proceed;
            if moving {
                s.phase = Phase::Approaching;
                advanced = true;
                let d = s.distance_to_mouth - cfg.step_distance();
                s.distance_to_mouth = if d <= 1e-9 { 0.0 } else { d };
                if s.distance_to_mouth == 0.0 {
                    s.phase = Phase::AtFeeding;
                    s.feeding_arrival_t = Some(s.clock);
                    s.ticks_left = cfg.ticks(cfg.bite_duration);
                    event = Some(RobotEvent::FeedingArrival { t: s.clock });
                }
            }
        }
        Phase::AtFeeding => {
            s.ticks_left -= 1;
            if s.ticks_left == 0 {
                let bite = BiteEvent {
                    staging_arrival_t: s.staging_arrival_t.unwrap_or(0.0),
                    feeding_arrival_t: s.feeding_arrival_t.unwrap_or(s.clock),
                    bite_complete_t: s.clock,
                };
                s.phase = Phase::Returning;
                s.distance_to_mouth = cfg.staging_distance;
                s.auto_proceed = false;
                s.ticks_left = cfg.ticks(cfg.return_duration);
                event = Some(RobotEvent::BiteComplete(bite));
            }
        }
        Phase::Returning => {
            s.ticks_left -= 1;
            if s.ticks_left == 0 {
                s.phase = Phase::Acquiring;
                s.staging_arrival_t = None;
                s.feeding_arrival_t = None;
                s.ticks_left = cfg.ticks(cfg.acquire_duration);
            }
        }
    }
    Ok(StepOutcome {
        state: s,
        event,
        advanced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approaching(d: f64) -> RobotState {
        RobotState {
            phase: Phase::Approaching,
            distance_to_mouth: d,
            clock: 10.0,
            tick: 20,
            ticks_left: 0,
            auto_proceed: false,
            staging_arrival_t: Some(8.0),
            feeding_arrival_t: None,
        }
    }

    #[test]
    fn proceed_moves_one_step() {
        let cfg = TrajectoryConfig::default();
        let out = step_robot(&approaching(0.381), Command::Proceed, &cfg).unwrap();
        assert!((out.state.distance_to_mouth - 0.356).abs() < 1e-12);
        assert!(out.advanced);
        let out = step_robot(&approaching(0.2), Command::Stop, &cfg).unwrap();
        assert_eq!(out.state.distance_to_mouth, 0.2);
        assert!(!out.advanced);
    }

    #[test]
    fn arrival_logs_feeding_time() {
        let cfg = TrajectoryConfig::default();
        let out = step_robot(&approaching(0.01), Command::Proceed, &cfg).unwrap();
        assert_eq!(out.state.phase, Phase::AtFeeding);
        assert_eq!(out.state.distance_to_mouth, 0.0);
        assert_eq!(out.event, Some(RobotEvent::FeedingArrival { t: out.state.clock }));
        assert_eq!(out.state.clock, 10.5);
    }

    #[test]
    fn full_cycle_under_constant_proceed() {
        let cfg = TrajectoryConfig::default();
        let mut s = RobotState::start(&cfg);
        let mut phases = vec![s.phase];
        let mut bites = Vec::new();
        for _ in 0..200 {
            let out = step_robot(&s, Command::Proceed, &cfg).unwrap();
            if let Some(RobotEvent::BiteComplete(b)) = out.event {
                bites.push(b);
            }
            if out.state.phase != *phases.last().unwrap() {
                assert_eq!(out.state.phase, phases.last().unwrap().next());
                phases.push(out.state.phase);
            }
            s = out.state;
        }
        assert_eq!(bites[0].staging_arrival_t, 4.0);
        assert_eq!(bites[0].feeding_arrival_t, 12.0);
        assert_eq!(bites[0].bite_complete_t, 14.0);
        assert_eq!(bites[1].feeding_arrival_t - bites[0].feeding_arrival_t, 16.0);
    }

    #[test]
    fn trigger_latches_and_is_rejected_when_busy() {
        let cfg = TrajectoryConfig::default();
        let mut s = approaching(0.381);
        s.phase = Phase::AtStaging;
        let out = step_robot(&s, Command::TriggerFullTrajectory, &cfg).unwrap();
        assert!(out.state.auto_proceed);
        let out2 = step_robot(&out.state, Command::Stop, &cfg).unwrap();
        assert!(out2.advanced);
        let start = RobotState::start(&cfg);
        assert!(matches!(
            step_robot(&start, Command::TriggerFullTrajectory, &cfg),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn timed_phases_ignore_stop() {
        let cfg = TrajectoryConfig::default();
        let mut s = RobotState::start(&cfg);
        for _ in 0..cfg.ticks(cfg.acquire_duration) {
            s = step_robot(&s, Command::Stop, &cfg).unwrap().state;
        }
        assert_eq!(s.phase, Phase::AtStaging);
        for _ in 0..10 {
            s = step_robot(&s, Command::Stop, &cfg).unwrap().state;
        }
        assert_eq!(s.phase, Phase::AtStaging);
        assert_eq!(s.distance_to_mouth, cfg.staging_distance);
    }
}
