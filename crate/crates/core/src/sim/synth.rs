//! Sensor synthesis from a behavior script.
//!
//! Recipes, per behavior state:
//!
//! | state      | accelerometer                                   | throat mic                              |
//! |------------|-------------------------------------------------|-----------------------------------------|
//! | Idle       | gravity + white noise                           | white noise                             |
//! | Chewing    | jaw sinusoid at the chew rate (0.4x when light) | noise bursts gated at the chew rate     |
//! | Talking    | small 5 Hz jaw motion                           | sustained noise with 4 Hz modulation    |
//! | HeadMotion | half-sine transient, yaw rotation               | white noise                             |
//!
//! Glances add a small transient and yaw. A talking dining partner leaks
//! faintly into the mic.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::behavior::{BehaviorScript, BehaviorState, ParticipantStyle};
use crate::dataio::{ImuSample, MicSample};

pub const GRAVITY: f64 = 9.81;
pub const SYNTH_IMU_RATE_HZ: f64 = 200.0;
/// Well below a real throat mic; the pipeline only needs 100 Hz.
pub const SYNTH_MIC_RATE_HZ: f64 = 500.0;
/// Timestamp jitter as a fraction of the sample period.
const JITTER: f64 = 0.2;
const LIGHT_CHEW: f64 = 0.4;
const PARTNER_LEAK: f64 = 0.08;

/// Incremental sensor generator. Samples whose nominal time falls on a
/// control tick are exact; all others carry timestamp jitter.
#[derive(Debug, Clone)]
pub struct SensorSynth {
    rng: ChaCha8Rng,
    imu_rate: f64,
    mic_rate: f64,
    imu_per_tick: u64,
    mic_per_tick: u64,
    next_imu: u64,
    next_mic: u64,
}

impl SensorSynth {
    pub fn new(rng: ChaCha8Rng, imu_rate: f64, mic_rate: f64, control_dt: f64) -> Self {
        Self {
            rng,
            imu_rate,
            mic_rate,
            imu_per_tick: ((imu_rate * control_dt).round() as u64).max(1),
            mic_per_tick: ((mic_rate * control_dt).round() as u64).max(1),
            next_imu: 0,
            next_mic: 0,
        }
    }

    fn stamp(&mut self, k: u64, rate: f64, per_tick: u64) -> f64 {
        let nominal = k as f64 / rate;
        if k.is_multiple_of(per_tick) {
            nominal
        } else {
            nominal + self.rng.random_range(-JITTER..JITTER) / rate
        }
    }

    fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Appends every sample with nominal time <= `t`.
    pub fn generate_until(
        &mut self,
        t: f64,
        script: &BehaviorScript,
        imu: &mut Vec<ImuSample>,
        mic: &mut Vec<MicSample>,
    ) {
        while self.next_imu as f64 / self.imu_rate <= t + 1e-9 {
            let ts = self.stamp(self.next_imu, self.imu_rate, self.imu_per_tick);
            let s = self.imu_sample(ts, script);
            imu.push(s);
            self.next_imu += 1;
        }
        while self.next_mic as f64 / self.mic_rate <= t + 1e-9 {
            let ts = self.stamp(self.next_mic, self.mic_rate, self.mic_per_tick);
            let amp = self.mic_sample(ts, script);
            mic.push(MicSample { t: ts, amp });
            self.next_mic += 1;
        }
    }

    fn imu_sample(&mut self, t: f64, script: &BehaviorScript) -> ImuSample {
        let st: &ParticipantStyle = &script.style;
        let mut a = [GRAVITY * st.tilt.sin(), 0.0, GRAVITY * st.tilt.cos()];
        let mut yaw = 0.0;
        if let Some(seg) = script.segment_at(t) {
            let dt = t - seg.start_t;
            let progress = dt / (seg.end_t - seg.start_t);
            match seg.state {
                BehaviorState::Chewing => {
                    let k = if seg.almost_done_at(t) { LIGHT_CHEW } else { 1.0 };
                    let jaw = k * st.chew_amplitude * (2.0 * PI * st.chew_rate_hz * dt).sin();
                    a[0] += 0.3 * jaw;
                    a[1] += jaw;
                    a[2] += 0.5 * jaw;
                }
                BehaviorState::Talking => {
                    a[1] += st.talk_jaw_amplitude * (2.0 * PI * 5.0 * dt).sin();
                }
                BehaviorState::HeadMotion => {
                    let bump = st.motion_amplitude * (PI * progress).sin();
                    a[0] += bump;
                    a[1] += 0.6 * bump * (3.0 * PI * progress).sin();
                    yaw += 0.4 * (PI * progress).sin();
                }
                BehaviorState::Idle => {}
            }
            if let Some((g0, g1)) = seg.glance.filter(|g| g.0 <= t && t < g.1) {
                let p = (t - g0) / (g1 - g0);
                a[0] += 0.3 * st.motion_amplitude * (PI * p).sin();
                yaw += 0.15 * (PI * p).sin();
            }
        }
        for v in &mut a {
            *v += st.imu_noise * self.normal();
        }
        let (s, c) = (yaw / 2.0).sin_cos();
        ImuSample {
            t,
            ax: a[0],
            ay: a[1],
            az: a[2],
            qw: c,
            qx: 0.0,
            qy: 0.0,
            qz: s,
        }
    }

    fn mic_sample(&mut self, t: f64, script: &BehaviorScript) -> f64 {
        let st = &script.style;
        let mut v = st.mic_noise * self.normal();
        let cues = script.cues_at(t);
        if let Some(seg) = script.segment_at(t) {
            let dt = t - seg.start_t;
            match seg.state {
                BehaviorState::Chewing => {
                    let k = if seg.almost_done_at(t) { LIGHT_CHEW } else { 1.0 };
                    let gate = (PI * st.chew_rate_hz * dt).sin().powi(4);
                    v += k * st.mic_chew_level * gate * self.normal();
                }
                BehaviorState::Talking => {
                    let fade = match seg.almost_done_from {
                        Some(a) if t >= a => 1.0 - 0.7 * (t - a) / (seg.end_t - a),
                        _ => 1.0,
                    };
                    let env = 0.6 + 0.4 * (2.0 * PI * 4.0 * dt).sin();
                    v += fade * env * st.mic_talk_level * self.normal();
                }
                BehaviorState::HeadMotion | BehaviorState::Idle => {}
            }
        }
        if cues.partner_talking {
            v += PARTNER_LEAK * st.mic_talk_level * self.normal();
        }
        v.clamp(-1.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::Scenario;
    use crate::sim::behavior::Segment;
    use rand::SeedableRng;

    fn script(state: BehaviorState) -> BehaviorScript {
        BehaviorScript {
            scenario: Scenario::Individual,
            style: ParticipantStyle::default(),
            segments: vec![Segment {
                start_t: 0.0,
                end_t: 100.0,
                state,
                almost_done_from: None,
                glance: None,
            }],
            partner: Vec::new(),
        }
    }

    fn run(state: BehaviorState, until: f64) -> (Vec<ImuSample>, Vec<MicSample>) {
        let mut s = SensorSynth::new(ChaCha8Rng::seed_from_u64(5), 200.0, 500.0, 0.5);
        let (mut imu, mut mic) = (Vec::new(), Vec::new());
        let sc = script(state);
        s.generate_until(until / 2.0, &sc, &mut imu, &mut mic);
        s.generate_until(until, &sc, &mut imu, &mut mic);
        (imu, mic)
    }

    #[test]
    fn tick_aligned_and_monotone() {
        let (imu, mic) = run(BehaviorState::Idle, 2.0);
        assert_eq!(imu.len(), 401);
        assert_eq!(mic.len(), 1001);
        assert_eq!(imu[0].t, 0.0);
        assert_eq!(imu[100].t, 0.5);
        assert_eq!(imu.last().unwrap().t, 2.0);
        assert!(imu.windows(2).all(|w| w[0].t < w[1].t));
        assert!(mic.windows(2).all(|w| w[0].t < w[1].t));
        assert!(mic.iter().all(|m| m.amp.abs() <= 1.0));
        assert!(imu.iter().all(|s| ((s.qw * s.qw + s.qz * s.qz).sqrt() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn chewing_is_more_energetic() {
        let var = |xs: &[f64]| {
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64
        };
        let (ci, cm) = run(BehaviorState::Chewing, 4.0);
        let (ii, im) = run(BehaviorState::Idle, 4.0);
        let ay = |v: &[ImuSample]| v.iter().map(|s| s.ay).collect::<Vec<_>>();
        let amp = |v: &[MicSample]| v.iter().map(|s| s.amp).collect::<Vec<_>>();
        assert!(var(&ay(&ci)) > 3.0 * var(&ay(&ii)));
        assert!(var(&amp(&cm)) > 3.0 * var(&amp(&im)));
    }
}
