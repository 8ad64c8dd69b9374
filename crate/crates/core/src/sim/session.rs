//! The 2 Hz closed control loop and synthetic dataset generation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::behavior::{BehaviorPlanner, BehaviorScript, BehaviorState, ParticipantStyle};
use super::oracle::OracleLabeler;
use super::robot::{step_robot, Phase, RobotEvent, RobotState, TrajectoryConfig};
use super::synth::{SensorSynth, SYNTH_IMU_RATE_HZ, SYNTH_MIC_RATE_HZ};
use super::derive_seed;
use crate::dataio::{BiteEvent, ImuSample, MicSample, MotionLabelSample, PolicyRecord, Scenario, SessionRecord};
use crate::error::{Error, Result};
use crate::features::{build_feature_vector, Ablation};
use crate::mlp::{MlpModel, Prediction};
use crate::parallel::{self, Execution};
use crate::policy::{
    fixed_interval_step, waffle_step, AssertivenessThreshold, Command, PolicyContext, PolicyKind, COMMIT_DISTANCE_M,
};
use crate::signal::{trailing_window, AlignedWindow, WINDOW_SECONDS};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub trajectory: TrajectoryConfig,
    pub imu_rate: f64,
    pub mic_rate: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            trajectory: TrajectoryConfig::default(),
            imu_rate: SYNTH_IMU_RATE_HZ,
            mic_rate: SYNTH_MIC_RATE_HZ,
        }
    }
}

/// Anything that maps a sensor window to a predicted time-to-bite.
pub trait Predictor: Sync {
    fn feature_order_id(&self) -> &str;
    fn predict_window(&self, window: &AlignedWindow) -> Result<f64>;
}

impl Predictor for MlpModel {
    fn feature_order_id(&self) -> &str {
        &self.feature_order_id
    }

    fn predict_window(&self, window: &AlignedWindow) -> Result<f64> {
        Ok(self.predict(&build_feature_vector(window)?)?.y_hat)
    }
}

/// Test double that reads the script instead of the sensors: predicts
/// `low` whenever the oracle would proceed at the window's end, else `high`.
#[derive(Debug, Clone)]
pub struct OraclePredictor {
    pub script: BehaviorScript,
    pub oracle: OracleLabeler,
    pub low: f64,
    pub high: f64,
    feature_order_id: String,
}

impl OraclePredictor {
    pub fn new(script: BehaviorScript) -> Self {
        Self {
            oracle: OracleLabeler::for_scenario(script.scenario),
            script,
            low: 0.0,
            high: 10.0,
            feature_order_id: Ablation::Combined.feature_order_id(),
        }
    }
}

impl Predictor for OraclePredictor {
    fn feature_order_id(&self) -> &str {
        &self.feature_order_id
    }

    fn predict_window(&self, window: &AlignedWindow) -> Result<f64> {
        let cues = self.script.cues_at(window.window_end_t);
        Ok(match self.oracle.decide(&cues).0 {
            Command::Proceed => self.low,
            _ => self.high,
        })
    }
}

pub enum Controller<'a> {
    /// The wizard: rules applied to the scripted cues.
    Oracle,
    Waffle {
        predictor: &'a dyn Predictor,
        threshold: AssertivenessThreshold,
    },
    FixedInterval {
        interval: f64,
    },
    MouthOpen,
    AlwaysFeed,
}

impl Controller<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Controller::Oracle => "oracle",
            Controller::Waffle { .. } => PolicyKind::Waffle.as_str(),
            Controller::FixedInterval { .. } => PolicyKind::FixedInterval.as_str(),
            Controller::MouthOpen => PolicyKind::MouthOpen.as_str(),
            Controller::AlwaysFeed => PolicyKind::AlwaysFeed.as_str(),
        }
    }
}

/// Parameters of a freshly generated session.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeSource {
    pub participant_id: String,
    pub scenario: Scenario,
    pub style: ParticipantStyle,
    pub duration: f64,
    pub seed: u64,
}

pub enum SessionSource<'a> {
    /// Behavior reacts to the robot; sensors are synthesized on the fly.
    Generative(GenerativeSource),
    /// Sensors are replayed; the script, if given, supplies cues.
    Recorded {
        session: &'a SessionRecord,
        script: Option<&'a BehaviorScript>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub t: f64,
    pub y_hat: Option<f64>,
    pub command: Command,
    /// State at the start of the tick.
    pub distance: f64,
    pub phase: Phase,
    /// No sensor window was available this tick.
    pub gap: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub policy: String,
    pub participant_id: String,
    pub scenario: Scenario,
    pub ticks: Vec<TickRecord>,
    pub bites: Vec<BiteEvent>,
    pub triggers: Vec<f64>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionSummary {
    pub bites: usize,
    pub mean_inter_bite: Option<f64>,
    pub proceed: usize,
    pub stop: usize,
    pub trigger: usize,
    /// Stop ticks per proceed tick; `None` without any proceed.
    pub stop_proceed_ratio: Option<f64>,
}

impl SessionLog {
    pub fn policy_records(&self) -> Vec<PolicyRecord> {
        self.ticks
            .iter()
            .map(|k| PolicyRecord {
                t: k.t,
                policy: self.policy.clone(),
                command: k.command.as_str().to_string(),
                y_hat: k.y_hat,
                distance: k.distance,
                phase: k.phase.as_str().to_string(),
            })
            .collect()
    }

    pub fn summary(&self) -> SessionSummary {
        let count = |c: Command| self.ticks.iter().filter(|k| k.command == c).count();
        let (proceed, stop, trigger) = (
            count(Command::Proceed),
            count(Command::Stop),
            count(Command::TriggerFullTrajectory),
        );
        let arrivals: Vec<f64> = self.bites.iter().map(|b| b.feeding_arrival_t).collect();
        let mean_inter_bite = (arrivals.len() >= 2)
            .then(|| (arrivals[arrivals.len() - 1] - arrivals[0]) / (arrivals.len() - 1) as f64);
        SessionSummary {
            bites: self.bites.len(),
            mean_inter_bite,
            proceed,
            stop,
            trigger,
            stop_proceed_ratio: (proceed > 0).then(|| stop as f64 / proceed as f64),
        }
    }

    /// Times of Stop commands issued inside the commit zone before the bite
    /// completed.
    pub fn commit_violations(&self) -> Vec<f64> {
        let mut committed = false;
        let mut out = Vec::new();
        for k in &self.ticks {
            match k.phase {
                Phase::Approaching | Phase::AtFeeding => {
                    committed |= k.distance <= COMMIT_DISTANCE_M;
                }
                _ => committed = false,
            }
            if committed && k.command == Command::Stop {
                out.push(k.t);
            }
        }
        out
    }
}

/// A simulated session: the data a recording would hold, plus the log.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub record: SessionRecord,
    pub script: Option<BehaviorScript>,
    pub log: SessionLog,
}

#[derive(Default)]
struct Columns {
    imu_t: Vec<f64>,
    ax: Vec<f64>,
    ay: Vec<f64>,
    az: Vec<f64>,
    mic_t: Vec<f64>,
    amp: Vec<f64>,
}

impl Columns {
    fn extend(&mut self, imu: &[ImuSample], mic: &[MicSample]) {
        for s in imu {
            self.imu_t.push(s.t);
            self.ax.push(s.ax);
            self.ay.push(s.ay);
            self.az.push(s.az);
        }
        for s in mic {
            self.mic_t.push(s.t);
            self.amp.push(s.amp);
        }
    }

    fn window(&self, end_t: f64) -> Result<AlignedWindow> {
        trailing_window(
            &self.imu_t,
            [&self.ax, &self.ay, &self.az],
            &self.mic_t,
            &self.amp,
            end_t,
        )
    }
}

#[allow(clippy::large_enum_variant)]
enum Feed<'a> {
    Generative {
        planner: BehaviorPlanner,
        synth: SensorSynth,
        imu: Vec<ImuSample>,
        mic: Vec<MicSample>,
    },
    Recorded {
        session: &'a SessionRecord,
        script: Option<&'a BehaviorScript>,
    },
}

impl Feed<'_> {
    fn advance(&mut self, t: f64, cols: &mut Columns) {
        if let Feed::Generative {
            planner,
            synth,
            imu,
            mic,
        } = self
        {
            planner.ensure_until(t);
            let (i0, m0) = (imu.len(), mic.len());
            synth.generate_until(t, planner.script(), imu, mic);
            cols.extend(&imu[i0..], &mic[m0..]);
        }
    }

    fn script(&self) -> Option<&BehaviorScript> {
        match self {
            Feed::Generative { planner, .. } => Some(planner.script()),
            Feed::Recorded { script, .. } => *script,
        }
    }

    fn on_bite(&mut self, t: f64) {
        if let Feed::Generative { planner, .. } = self {
            planner.on_bite(t);
        }
    }
}

fn check_feature_order(id: &str) -> Result<()> {
    if Ablation::ALL.iter().any(|a| a.feature_order_id() == id) {
        Ok(())
    } else {
        Err(Error::Integrity(format!(
            "model feature order {id:?} does not match any layout produced by this extractor"
        )))
    }
}

/// Runs one closed-loop session at the control cadence.
pub fn run_session(controller: &Controller<'_>, source: SessionSource<'_>, cfg: &SimConfig) -> Result<SimOutput> {
    let traj = &cfg.trajectory;
    traj.validate()?;
    if let Controller::Waffle { predictor, .. } = controller {
        check_feature_order(predictor.feature_order_id())?;
    }
    let needs_script = matches!(controller, Controller::Oracle | Controller::MouthOpen);

    let (participant_id, scenario, duration, mut feed) = match source {
        SessionSource::Generative(g) => {
            if !(g.duration >= 30.0) {
                return Err(Error::Config(format!("session duration {} s is below 30 s", g.duration)));
            }
            let mut behavior_rng = ChaCha8Rng::seed_from_u64(g.seed);
            behavior_rng.set_stream(0);
            let mut sensor_rng = ChaCha8Rng::seed_from_u64(g.seed);
            sensor_rng.set_stream(1);
            let feed = Feed::Generative {
                planner: BehaviorPlanner::new(g.scenario, g.style, behavior_rng),
                synth: SensorSynth::new(sensor_rng, cfg.imu_rate, cfg.mic_rate, traj.control_dt),
                imu: Vec::new(),
                mic: Vec::new(),
            };
            (g.participant_id, g.scenario, g.duration, feed)
        }
        SessionSource::Recorded { session, script } => {
            let (_, end) = session.common_span().ok_or_else(|| {
                Error::InsufficientData(format!(
                    "session {}/{} has no overlapping sensor data",
                    session.participant_id, session.scenario
                ))
            })?;
            (
                session.participant_id.clone(),
                session.scenario,
                end,
                Feed::Recorded { session, script },
            )
        }
    };
    if needs_script && feed.script().is_none() {
        return Err(Error::Config(format!(
            "the {} controller needs a behavior script for its cues",
            controller.name()
        )));
    }

    let mut cols = Columns::default();
    if let Feed::Recorded { session, .. } = &feed {
        cols.extend(&session.imu, &session.mic);
    }
    let oracle = OracleLabeler::for_scenario(scenario);
    let mut robot = RobotState::start(traj);
    let mut ctx = PolicyContext::new(robot.distance_to_mouth, 0.0);
    let mut fixed_pending = false;
    let n_ticks = (duration / traj.control_dt + 1e-9).floor() as u64;
    let mut log = SessionLog {
        policy: controller.name().to_string(),
        participant_id: participant_id.clone(),
        scenario,
        ticks: Vec::with_capacity(n_ticks as usize),
        bites: Vec::new(),
        triggers: Vec::new(),
        diagnostics: Vec::new(),
    };
    let mut motion = Vec::with_capacity(n_ticks as usize);

    for n in 0..n_ticks {
        let t = n as f64 * traj.control_dt;
        feed.advance(t, &mut cols);
        let oracle_cmd = feed.script().map(|s| oracle.decide(&s.cues_at(t)).0);
        let mut y_hat = None;
        let mut gap = false;
        let cmd = match controller {
            Controller::Oracle => oracle_cmd.expect("script checked"),
            Controller::AlwaysFeed => Command::Proceed,
            Controller::MouthOpen => {
                if robot.phase == Phase::AtStaging && oracle_cmd == Some(Command::Proceed) {
                    Command::TriggerFullTrajectory
                } else {
                    Command::Stop
                }
            }
            Controller::FixedInterval { interval } => {
                fixed_pending |= fixed_interval_step(t, *interval) == Command::TriggerFullTrajectory;
                if fixed_pending && robot.phase.is_steerable() {
                    fixed_pending = false;
                    Command::TriggerFullTrajectory
                } else {
                    Command::Stop
                }
            }
            Controller::Waffle { predictor, threshold } => {
                let y = if t + 1e-9 < WINDOW_SECONDS {
                    None
                } else {
                    match cols.window(t) {
                        Ok(w) => Some(predictor.predict_window(&w)?),
                        Err(Error::InsufficientData(_) | Error::Coverage { .. }) => None,
                        Err(e) => return Err(e),
                    }
                };
                if y.is_none() {
                    gap = true;
                    log.diagnostics.push(format!("t = {t}: no sensor window, fail-safe stop"));
                }
                y_hat = y;
                ctx.distance_to_mouth = robot.distance_to_mouth;
                ctx.session_clock = t;
                let (c, next) = waffle_step(ctx, Prediction { y_hat: y.unwrap_or(f64::NAN) }, *threshold);
                ctx = next;
                c
            }
        };
        if cmd == Command::TriggerFullTrajectory {
            log.triggers.push(t);
        }
        let out = step_robot(&robot, cmd, traj)?;
        log.ticks.push(TickRecord {
            t,
            y_hat,
            command: cmd,
            distance: robot.distance_to_mouth,
            phase: robot.phase,
            gap,
        });
        motion.push(MotionLabelSample {
            t,
            moving: u8::from(out.advanced),
        });
        match out.event {
            Some(RobotEvent::FeedingArrival { t: ta }) => feed.on_bite(ta),
            Some(RobotEvent::BiteComplete(b)) => {
                log.bites.push(b);
                ctx = ctx.bite_completed();
            }
            _ => {}
        }
        robot = out.state;
    }
    feed.advance(n_ticks as f64 * traj.control_dt, &mut cols);
    if robot.phase == Phase::AtFeeding {
        // arrived but not finished: close the bite at its scheduled time
        log.bites.push(BiteEvent {
            staging_arrival_t: robot.staging_arrival_t.unwrap_or(0.0),
            feeding_arrival_t: robot.feeding_arrival_t.unwrap_or(robot.clock),
            bite_complete_t: robot.clock + f64::from(robot.ticks_left) * traj.control_dt,
        });
    }

    let (record, script) = match feed {
        Feed::Generative { planner, imu, mic, .. } => (
            SessionRecord {
                participant_id,
                scenario,
                imu,
                mic,
                bites: log.bites.clone(),
                motion,
            },
            Some(planner.into_script()),
        ),
        Feed::Recorded { session, script } => (
            SessionRecord {
                bites: log.bites.clone(),
                motion,
                ..session.clone()
            },
            script.cloned(),
        ),
    };
    Ok(SimOutput { record, script, log })
}

/// One oracle-labeled synthetic session.
pub fn generate_synthetic_session(source: GenerativeSource, cfg: &SimConfig) -> Result<SimOutput> {
    run_session(&Controller::Oracle, SessionSource::Generative(source), cfg)
}

/// Batch generation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub participants: usize,
    pub individual_duration: f64,
    pub social_duration: f64,
    pub seed: u64,
    pub style_spread: f64,
    pub sim: SimConfig,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            participants: 10,
            individual_duration: 180.0,
            social_duration: 240.0,
            seed: 7,
            style_spread: 1.0,
            sim: SimConfig::default(),
        }
    }
}

pub fn participant_id(index: usize) -> String {
    format!("P{:02}", index + 1)
}

pub fn participant_style(seed: u64, index: usize, spread: f64) -> ParticipantStyle {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[1, index as u64]));
    ParticipantStyle::sample(&mut rng, spread)
}

/// Generative sources for every participant, individual then social.
pub fn dataset_sources(cfg: &DatasetConfig) -> Vec<GenerativeSource> {
    let mut out = Vec::with_capacity(cfg.participants * 2);
    for i in 0..cfg.participants {
        let style = participant_style(cfg.seed, i, cfg.style_spread);
        for (k, (scenario, duration)) in [
            (Scenario::Individual, cfg.individual_duration),
            (Scenario::Social, cfg.social_duration),
        ]
        .into_iter()
        .enumerate()
        {
            out.push(GenerativeSource {
                participant_id: participant_id(i),
                scenario,
                style: style.clone(),
                duration,
                seed: derive_seed(cfg.seed, &[2, i as u64, k as u64]),
            });
        }
    }
    out
}

/// Oracle-labeled sessions for every participant and scenario.
pub fn generate_dataset(cfg: &DatasetConfig, exec: Execution) -> Result<Vec<SimOutput>> {
    if cfg.participants == 0 {
        return Err(Error::Config("at least one participant is required".into()));
    }
    let sources = dataset_sources(cfg);
    parallel::try_map(exec, &sources, |s| generate_synthetic_session(s.clone(), &cfg.sim))
}

/// Proceed ticks strictly inside scripted talking (before the trailing-off
/// tail), outside the commit zone.
pub fn proceeds_while_talking(log: &SessionLog, script: &BehaviorScript) -> Vec<f64> {
    log.ticks
        .iter()
        .filter(|k| k.command == Command::Proceed && k.phase.is_steerable() && k.distance > COMMIT_DISTANCE_M)
        .filter(|k| {
            let c = script.cues_at(k.t);
            c.state == BehaviorState::Talking && !c.almost_done_talking
        })
        .map(|k| k.t)
        .collect()
}
