//! Desk-scale simulation: a feeding-robot trajectory, a scripted
//! participant with wearable sensors, and the wizard rules that label them.

pub mod behavior;
pub mod oracle;
pub mod robot;
pub mod session;
pub mod synth;

pub use behavior::{BehaviorPlanner, BehaviorScript, BehaviorState, Cues, ParticipantStyle, PartnerSegment, Segment};
pub use oracle::{Cue, OracleLabeler, Rule};
pub use robot::{step_robot, Phase, RobotEvent, RobotState, StepOutcome, TrajectoryConfig};
pub use session::{
    dataset_sources, generate_dataset, generate_synthetic_session, participant_id, participant_style,
    proceeds_while_talking, run_session, Controller, DatasetConfig, GenerativeSource, OraclePredictor, Predictor,
    SessionLog, SessionSource, SessionSummary, SimConfig, SimOutput, TickRecord,
};
pub use synth::SensorSynth;

/// SplitMix64 over `base` and `parts`, for independent per-purpose seeds.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    parts.iter().fold(mix(base), |acc, &p| mix(acc ^ p))
}
