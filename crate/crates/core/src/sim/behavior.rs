//! Scripted participant behavior and the dining-partner channel.
//!
//! The planner is reactive: segments are sampled lazily as simulated time
//! advances, and a feeding arrival starts a chewing segment immediately.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataio::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviorState {
    Idle,
    Chewing,
    Talking,
    HeadMotion,
}

/// One contiguous stretch of a single behavior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start_t: f64,
    pub end_t: f64,
    pub state: BehaviorState,
    /// Start of the winding-down tail (lighter chewing, trailing off).
    pub almost_done_from: Option<f64>,
    /// Interval during which the participant glances at the robot.
    pub glance: Option<(f64, f64)>,
}

impl Segment {
    fn contains(&self, t: f64) -> bool {
        self.start_t <= t && t < self.end_t
    }

    pub fn almost_done_at(&self, t: f64) -> bool {
        self.almost_done_from.is_some_and(|a| t >= a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartnerSegment {
    pub start_t: f64,
    pub end_t: f64,
    pub talking: bool,
    pub almost_done_from: Option<f64>,
}

/// Per-participant behavior and signal parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantStyle {
    /// Jaw oscillation frequency while chewing, Hz.
    pub chew_rate_hz: f64,
    pub chew_duration_mean: f64,
    /// Fraction of a chewing segment spent chewing lightly.
    pub almost_done_fraction: f64,
    pub glance_prob: f64,
    pub idle_duration_mean: f64,
    pub head_motion_prob: f64,
    pub talk_prob: f64,
    pub talk_duration_mean: f64,
    /// Accelerometer amplitudes, m/s^2.
    pub chew_amplitude: f64,
    pub motion_amplitude: f64,
    pub talk_jaw_amplitude: f64,
    pub imu_noise: f64,
    /// Throat-mic amplitudes in [-1, 1] units.
    pub mic_chew_level: f64,
    pub mic_talk_level: f64,
    pub mic_noise: f64,
    /// Sensor mounting tilt, rad.
    pub tilt: f64,
}

impl Default for ParticipantStyle {
    fn default() -> Self {
        Self {
            chew_rate_hz: 1.5,
            chew_duration_mean: 9.0,
            almost_done_fraction: 0.25,
            glance_prob: 0.3,
            idle_duration_mean: 3.0,
            head_motion_prob: 0.25,
            talk_prob: 0.45,
            talk_duration_mean: 5.0,
            chew_amplitude: 0.8,
            motion_amplitude: 1.5,
            talk_jaw_amplitude: 0.12,
            imu_noise: 0.05,
            mic_chew_level: 0.35,
            mic_talk_level: 0.5,
            mic_noise: 0.02,
            tilt: 0.2,
        }
    }
}

impl ParticipantStyle {
    /// A style perturbed around the default; `spread` in [0, 1] scales the
    /// relative variation.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, spread: f64) -> Self {
        let d = Self::default();
        let s = spread.clamp(0.0, 1.0);
        let mut jitter = |v: f64, rel: f64| v * (1.0 + s * rel * rng.random_range(-1.0..=1.0));
        Self {
            chew_rate_hz: jitter(d.chew_rate_hz, 0.33),
            chew_duration_mean: jitter(d.chew_duration_mean, 0.35),
            almost_done_fraction: jitter(d.almost_done_fraction, 0.3),
            glance_prob: jitter(d.glance_prob, 0.5),
            idle_duration_mean: jitter(d.idle_duration_mean, 0.4),
            head_motion_prob: jitter(d.head_motion_prob, 0.5),
            talk_prob: jitter(d.talk_prob, 0.3),
            talk_duration_mean: jitter(d.talk_duration_mean, 0.3),
            chew_amplitude: jitter(d.chew_amplitude, 0.3),
            motion_amplitude: jitter(d.motion_amplitude, 0.3),
            talk_jaw_amplitude: jitter(d.talk_jaw_amplitude, 0.3),
            imu_noise: jitter(d.imu_noise, 0.3),
            mic_chew_level: jitter(d.mic_chew_level, 0.3),
            mic_talk_level: jitter(d.mic_talk_level, 0.3),
            mic_noise: jitter(d.mic_noise, 0.3),
            tilt: jitter(d.tilt, 1.0),
        }
    }
}

/// Observable cues at one instant, as the wizard would see them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cues {
    pub state: BehaviorState,
    pub glancing: bool,
    pub almost_done_chewing: bool,
    pub almost_done_talking: bool,
    pub partner_talking: bool,
    pub partner_almost_done: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorScript {
    pub scenario: Scenario,
    pub style: ParticipantStyle,
    pub segments: Vec<Segment>,
    /// Empty for individual sessions.
    pub partner: Vec<PartnerSegment>,
}

impl BehaviorScript {
    pub fn segment_at(&self, t: f64) -> Option<&Segment> {
        let i = self.segments.partition_point(|s| s.end_t <= t);
        self.segments.get(i).filter(|s| s.contains(t))
    }

    fn partner_at(&self, t: f64) -> Option<&PartnerSegment> {
        let i = self.partner.partition_point(|s| s.end_t <= t);
        self.partner.get(i).filter(|s| s.start_t <= t && t < s.end_t)
    }

    /// Cues at `t`; idle outside the scripted range.
    pub fn cues_at(&self, t: f64) -> Cues {
        let seg = self.segment_at(t);
        let state = seg.map_or(BehaviorState::Idle, |s| s.state);
        let almost = seg.is_some_and(|s| s.almost_done_at(t));
        let glancing = seg
            .and_then(|s| s.glance)
            .is_some_and(|(a, b)| a <= t && t < b);
        let partner = self.partner_at(t);
        let partner_talking = partner.is_some_and(|p| p.talking);
        Cues {
            state,
            glancing,
            almost_done_chewing: state == BehaviorState::Chewing && almost,
            almost_done_talking: state == BehaviorState::Talking && almost,
            partner_talking,
            partner_almost_done: partner_talking && partner.is_some_and(|p| p.almost_done_from.is_some_and(|a| t >= a)),
        }
    }

    /// Segments are ordered, contiguous and non-empty.
    pub fn is_well_formed(&self) -> bool {
        let contiguous = |a: f64, b: f64| (a - b).abs() < 1e-9;
        self.segments.iter().all(|s| s.end_t > s.start_t)
            && self.segments.windows(2).all(|w| contiguous(w[0].end_t, w[1].start_t))
            && self.partner.iter().all(|s| s.end_t > s.start_t)
            && self.partner.windows(2).all(|w| contiguous(w[0].end_t, w[1].start_t))
    }
}

/// Talking segments wind down over their final second.
const TALK_TAIL_S: f64 = 1.0;
const PARTNER_TAIL_S: f64 = 1.0;

/// Lazily extends a [`BehaviorScript`] as simulated time advances.
#[derive(Debug, Clone)]
pub struct BehaviorPlanner {
    rng: ChaCha8Rng,
    script: BehaviorScript,
}

impl BehaviorPlanner {
    pub fn new(scenario: Scenario, style: ParticipantStyle, rng: ChaCha8Rng) -> Self {
        let mut planner = Self {
            rng,
            script: BehaviorScript {
                scenario,
                style,
                segments: Vec::new(),
                partner: Vec::new(),
            },
        };
        let idle = planner.idle_segment(0.0);
        planner.script.segments.push(idle);
        planner
    }

    pub fn script(&self) -> &BehaviorScript {
        &self.script
    }

    pub fn into_script(self) -> BehaviorScript {
        self.script
    }

    /// Samples segments until both channels cover `t`.
    pub fn ensure_until(&mut self, t: f64) {
        while self.script.segments.last().is_some_and(|s| s.end_t <= t) {
            let last = self.script.segments.last().cloned().expect("non-empty");
            let next = self.after(&last);
            self.script.segments.push(next);
        }
        if self.script.scenario == Scenario::Social {
            loop {
                let start = self.script.partner.last().map_or(0.0, |p| p.end_t);
                if start > t {
                    break;
                }
                let talking = !self.script.partner.last().is_some_and(|p| p.talking);
                let seg = self.partner_segment(start, talking);
                self.script.partner.push(seg);
            }
        }
    }

    /// Food arrives at the mouth: chewing starts at `t`, replacing whatever
    /// had been planned from `t` on.
    pub fn on_bite(&mut self, t: f64) {
        self.ensure_until(t);
        let segs = &mut self.script.segments;
        while segs.last().is_some_and(|s| s.start_t >= t) && segs.len() > 1 {
            segs.pop();
        }
        let last = segs.last_mut().expect("non-empty");
        if last.start_t >= t {
            segs.clear();
        } else {
            last.end_t = t;
            last.almost_done_from = last.almost_done_from.filter(|&a| a < t);
            last.glance = last.glance.filter(|g| g.0 < t).map(|(a, b)| (a, b.min(t)));
        }
        let chew = self.chew_segment(t);
        self.script.segments.push(chew);
    }

    fn after(&mut self, last: &Segment) -> Segment {
        let t = last.end_t;
        let style = &self.script.style;
        let social = self.script.scenario == Scenario::Social;
        let (p_head, p_talk) = (style.head_motion_prob, if social { style.talk_prob } else { 0.0 });
        match last.state {
            BehaviorState::Idle | BehaviorState::Chewing => {
                let u: f64 = self.rng.random();
                if u < p_head {
                    self.head_segment(t)
                } else if u < p_head + p_talk && last.state == BehaviorState::Idle {
                    self.talk_segment(t)
                } else {
                    self.idle_segment(t)
                }
            }
            BehaviorState::Talking | BehaviorState::HeadMotion => self.idle_segment(t),
        }
    }

    fn idle_segment(&mut self, t: f64) -> Segment {
        let mean = self.script.style.idle_duration_mean;
        let u: f64 = self.rng.random_range(1e-6..1.0);
        let d = (-mean * u.ln()).clamp(0.5, 4.0 * mean);
        Segment {
            start_t: t,
            end_t: t + d,
            state: BehaviorState::Idle,
            almost_done_from: None,
            glance: None,
        }
    }

    fn head_segment(&mut self, t: f64) -> Segment {
        let d = self.rng.random_range(1.0..2.5);
        Segment {
            start_t: t,
            end_t: t + d,
            state: BehaviorState::HeadMotion,
            almost_done_from: None,
            glance: None,
        }
    }

    fn talk_segment(&mut self, t: f64) -> Segment {
        let d = self.script.style.talk_duration_mean * self.rng.random_range(0.6..1.4);
        let d = d.max(TALK_TAIL_S + 0.5);
        Segment {
            start_t: t,
            end_t: t + d,
            state: BehaviorState::Talking,
            almost_done_from: Some(t + d - TALK_TAIL_S),
            glance: None,
        }
    }

    fn chew_segment(&mut self, t: f64) -> Segment {
        let style = &self.script.style;
        let d = style.chew_duration_mean * self.rng.random_range(0.7..1.3);
        let light = t + d * (1.0 - style.almost_done_fraction.clamp(0.05, 0.9));
        let glance_prob = style.glance_prob;
        let glance = if self.rng.random::<f64>() < glance_prob {
            let g0 = (light - self.rng.random_range(0.5..2.0)).max(t + 0.5);
            Some((g0, (g0 + 1.0).min(t + d)))
        } else {
            None
        };
        Segment {
            start_t: t,
            end_t: t + d,
            state: BehaviorState::Chewing,
            almost_done_from: Some(light),
            glance,
        }
    }

    fn partner_segment(&mut self, t: f64, talking: bool) -> PartnerSegment {
        let d = if talking {
            self.rng.random_range(2.0..8.0)
        } else {
            self.rng.random_range(3.0..12.0)
        };
        PartnerSegment {
            start_t: t,
            end_t: t + d,
            talking,
            almost_done_from: talking.then_some(t + d - PARTNER_TAIL_S),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn planner(scenario: Scenario, seed: u64) -> BehaviorPlanner {
        BehaviorPlanner::new(scenario, ParticipantStyle::default(), ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn segments_stay_contiguous_through_bites() {
        let mut p = planner(Scenario::Social, 4);
        for k in 0..40 {
            let t = k as f64 * 7.3;
            p.ensure_until(t);
            if k % 3 == 0 {
                p.on_bite(t + 0.5);
            }
        }
        let s = p.script();
        assert!(s.is_well_formed());
        assert!(s.segments.iter().any(|g| g.state == BehaviorState::Talking));
        assert!(!s.partner.is_empty());
    }

    #[test]
    fn bite_starts_chewing() {
        let mut p = planner(Scenario::Individual, 1);
        p.ensure_until(5.0);
        p.on_bite(5.0);
        let c = p.script().cues_at(5.0);
        assert_eq!(c.state, BehaviorState::Chewing);
        assert!(!c.almost_done_chewing);
        let seg = p.script().segment_at(5.0).unwrap().clone();
        assert!(p.script().cues_at(seg.end_t - 1e-6).almost_done_chewing);
    }

    #[test]
    fn individual_has_no_partner_or_talking() {
        let mut p = planner(Scenario::Individual, 2);
        p.ensure_until(500.0);
        assert!(p.script().partner.is_empty());
        assert!(p.script().segments.iter().all(|s| s.state != BehaviorState::Talking));
    }

    #[test]
    fn style_sampling_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let s = ParticipantStyle::sample(&mut rng, 1.0);
            assert!((1.0..=2.0).contains(&s.chew_rate_hz));
            assert!(s.chew_duration_mean > 5.0);
        }
        assert_eq!(ParticipantStyle::sample(&mut rng, 0.0), ParticipantStyle::default());
    }
}
