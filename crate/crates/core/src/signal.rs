//! Uniform resampling of irregular sensor tracks and 1 s window slicing.

use std::sync::Arc;

use crate::error::{Error, Result};

pub const IMU_RATE_HZ: f64 = 200.0;
pub const MIC_RATE_HZ: f64 = 100.0;
pub const WINDOW_SECONDS: f64 = 1.0;
pub const IMU_WINDOW_LEN: usize = 200;
pub const MIC_WINDOW_LEN: usize = 100;
/// Hop between consecutive windows; 0.5 s gives the 2 Hz prediction cadence.
pub const DEFAULT_HOP: f64 = 0.5;

// Slack for floating-point grid arithmetic (seconds or fractional samples).
const GRID_EPS: f64 = 1e-9;

/// Several channels sampled on the grid `start_t + k / rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSeries {
    pub start_t: f64,
    pub rate: f64,
    pub channels: Vec<Vec<f64>>,
}

impl UniformSeries {
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time_at(&self, k: usize) -> f64 {
        self.start_t + k as f64 / self.rate
    }

    pub fn end_t(&self) -> f64 {
        self.time_at(self.len().saturating_sub(1))
    }
}

/// Number of grid points `t0 + k / rate` inside `[t0, t1]`.
pub fn grid_len(t0: f64, t1: f64, rate: f64) -> usize {
    ((t1 - t0) * rate + GRID_EPS).floor() as usize + 1
}

/// Linear interpolation of `channels` (sampled at `times`) onto a uniform grid
/// over `span`. No extrapolation: the input must cover the whole span.
pub fn resample_linear(
    times: &[f64],
    channels: &[&[f64]],
    rate: f64,
    span: (f64, f64),
) -> Result<UniformSeries> {
    let (t0, t1) = span;
    if times.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "resampling needs at least 2 samples, got {}",
            times.len()
        )));
    }
    if !(rate > 0.0) || !(t1 >= t0) {
        return Err(Error::Domain(format!("rate {rate} over span [{t0}, {t1}]")));
    }
    if let Some(c) = channels.iter().find(|c| c.len() != times.len()) {
        return Err(Error::Shape(format!(
            "channel has {} values for {} timestamps",
            c.len(),
            times.len()
        )));
    }
    let first = times[0];
    let last = times[times.len() - 1];
    if t0 < first - GRID_EPS || t1 > last + GRID_EPS {
        return Err(Error::Coverage {
            t0,
            t1,
            available_start: first,
            available_end: last,
        });
    }

    let n = grid_len(t0, t1, rate);
    let mut out: Vec<Vec<f64>> = channels.iter().map(|_| Vec::with_capacity(n)).collect();
    let mut j = 0usize;
    for k in 0..n {
        let t = (t0 + k as f64 / rate).clamp(first, last);
        while j + 2 < times.len() && times[j + 1] <= t {
            j += 1;
        }
        // times[j] <= t <= times[j + 1], or t == times[j + 1] at the very end
        let (ta, tb) = (times[j], times[j + 1]);
        for (ch, dst) in channels.iter().zip(out.iter_mut()) {
            dst.push(lerp(ta, ch[j], tb, ch[j + 1], t));
        }
    }
    Ok(UniformSeries {
        start_t: t0,
        rate,
        channels: out,
    })
}

#[inline]
fn lerp(ta: f64, va: f64, tb: f64, vb: f64, t: f64) -> f64 {
    if t <= ta {
        return va;
    }
    if t >= tb {
        return vb;
    }
    let w = (t - ta) / (tb - ta);
    let v = va + (vb - va) * w;
    let (lo, hi) = if va <= vb { (va, vb) } else { (vb, va) };
    v.clamp(lo, hi)
}

/// One aligned 1 s analysis window.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedWindow {
    pub window_end_t: f64,
    /// ax, ay, az; 200 samples each.
    pub imu_accel: [Vec<f64>; 3],
    /// 100 samples.
    pub mic: Vec<f64>,
}

impl AlignedWindow {
    pub fn new(window_end_t: f64, imu_accel: [Vec<f64>; 3], mic: Vec<f64>) -> Result<Self> {
        if imu_accel.iter().any(|c| c.len() != IMU_WINDOW_LEN) || mic.len() != MIC_WINDOW_LEN {
            return Err(Error::Shape(format!(
                "window needs {IMU_WINDOW_LEN} imu and {MIC_WINDOW_LEN} mic samples, got {:?} and {}",
                imu_accel.iter().map(Vec::len).collect::<Vec<_>>(),
                mic.len()
            )));
        }
        Ok(Self {
            window_end_t,
            imu_accel,
            mic,
        })
    }
}

/// A 500 ms half of an [`AlignedWindow`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfWindow<'a> {
    pub imu_accel: [&'a [f64]; 3],
    pub mic: &'a [f64],
}

impl<'a> HalfWindow<'a> {
    /// Channels in feature order: ax, ay, az, mic.
    pub fn axes(&self) -> [&'a [f64]; 4] {
        [self.imu_accel[0], self.imu_accel[1], self.imu_accel[2], self.mic]
    }
}

/// Splits a window into its two 500 ms low-level windows.
pub fn split_low_level(window: &AlignedWindow) -> [HalfWindow<'_>; 2] {
    let hi = IMU_WINDOW_LEN / 2;
    let hm = MIC_WINDOW_LEN / 2;
    let [ax, ay, az] = &window.imu_accel;
    [
        HalfWindow {
            imu_accel: [&ax[..hi], &ay[..hi], &az[..hi]],
            mic: &window.mic[..hm],
        },
        HalfWindow {
            imu_accel: [&ax[hi..], &ay[hi..], &az[hi..]],
            mic: &window.mic[hm..],
        },
    ]
}

fn end_index(series: &UniformSeries, end_t: f64) -> Option<usize> {
    let x = (end_t - series.start_t) * series.rate;
    let k = (x + GRID_EPS).floor();
    (k >= 0.0 && (x - k).abs() < 1e-6).then_some(k as usize)
}

/// Cuts trailing-1 s windows ending at `t0 + 1 + n * hop`.
///
/// `imu` must hold three channels at 200 Hz and `mic` one channel at 100 Hz,
/// both starting at the same time. Partial trailing windows are dropped.
pub fn slice_windows(
    imu: &UniformSeries,
    mic: &UniformSeries,
    hop: f64,
) -> Result<Vec<AlignedWindow>> {
    window_ends(imu, mic, hop)?
        .into_iter()
        .map(|end_t| window_at(imu, mic, end_t))
        .collect()
}

/// End times of every complete window [`slice_windows`] would emit.
pub fn window_ends(imu: &UniformSeries, mic: &UniformSeries, hop: f64) -> Result<Vec<f64>> {
    if !(hop > 0.0) {
        return Err(Error::Domain(format!("hop must be positive, got {hop}")));
    }
    if imu.channels.len() != 3 || mic.channels.len() != 1 {
        return Err(Error::Shape(format!(
            "expected 3 imu channels and 1 mic channel, got {} and {}",
            imu.channels.len(),
            mic.channels.len()
        )));
    }
    if (imu.rate - IMU_RATE_HZ).abs() > GRID_EPS || (mic.rate - MIC_RATE_HZ).abs() > GRID_EPS {
        return Err(Error::Domain(format!(
            "expected {IMU_RATE_HZ} Hz imu and {MIC_RATE_HZ} Hz mic, got {} and {}",
            imu.rate, mic.rate
        )));
    }
    if (imu.start_t - mic.start_t).abs() > GRID_EPS {
        return Err(Error::Shape(format!(
            "imu starts at {} but mic at {}",
            imu.start_t, mic.start_t
        )));
    }
    let t0 = imu.start_t;
    let span = imu.end_t().min(mic.end_t()) - t0;
    if imu.is_empty() || mic.is_empty() || span + GRID_EPS < WINDOW_SECONDS {
        return Err(Error::InsufficientData(format!(
            "common span {span:.3} s is shorter than one {WINDOW_SECONDS} s window"
        )));
    }
    let count = ((span - WINDOW_SECONDS) / hop + GRID_EPS).floor() as usize + 1;
    Ok((0..count)
        .map(|n| t0 + WINDOW_SECONDS + n as f64 * hop)
        .collect())
}

/// The window ending at grid time `end_t`.
pub fn window_at(imu: &UniformSeries, mic: &UniformSeries, end_t: f64) -> Result<AlignedWindow> {
    let ie = end_index(imu, end_t)
        .filter(|&k| k + 1 >= IMU_WINDOW_LEN && k < imu.len())
        .ok_or_else(|| Error::InsufficientData(format!("no complete imu window ends at {end_t}")))?;
    let me = end_index(mic, end_t)
        .filter(|&k| k + 1 >= MIC_WINDOW_LEN && k < mic.len())
        .ok_or_else(|| Error::InsufficientData(format!("no complete mic window ends at {end_t}")))?;
    let imu_range = ie + 1 - IMU_WINDOW_LEN..=ie;
    let mic_range = me + 1 - MIC_WINDOW_LEN..=me;
    let imu_accel = [0, 1, 2].map(|c| imu.channels[c][imu_range.clone()].to_vec());
    AlignedWindow::new(end_t, imu_accel, mic.channels[0][mic_range].to_vec())
}

/// Hook applied to raw microphone amplitudes before interpolation.
///
/// Receives timestamps and amplitudes, returns transformed amplitudes of the
/// same length. The default pipeline applies none.
pub type MicPreTransform = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// Resamples raw session tracks over `span` to the 200 Hz / 100 Hz grids.
pub fn resample_session_span(
    session: &crate::dataio::SessionRecord,
    span: (f64, f64),
    mic_pre: Option<&MicPreTransform>,
) -> Result<(UniformSeries, UniformSeries)> {
    let (imu_lo, imu_hi) = bracket(session.imu.len(), |i| session.imu[i].t, span);
    let (mic_lo, mic_hi) = bracket(session.mic.len(), |i| session.mic[i].t, span);
    let imu = &session.imu[imu_lo..imu_hi];
    let mic = &session.mic[mic_lo..mic_hi];

    let it: Vec<f64> = imu.iter().map(|s| s.t).collect();
    let ax: Vec<f64> = imu.iter().map(|s| s.ax).collect();
    let ay: Vec<f64> = imu.iter().map(|s| s.ay).collect();
    let az: Vec<f64> = imu.iter().map(|s| s.az).collect();
    let imu_u = resample_linear(&it, &[&ax, &ay, &az], IMU_RATE_HZ, span)?;

    let mt: Vec<f64> = mic.iter().map(|s| s.t).collect();
    let mut amp: Vec<f64> = mic.iter().map(|s| s.amp).collect();
    if let Some(f) = mic_pre {
        amp = f(&mt, &amp);
    }
    let mic_u = resample_linear(&mt, &[&amp], MIC_RATE_HZ, span)?;
    Ok((imu_u, mic_u))
}

// Index range of samples needed to interpolate over `span`: one sample on
// either side of it where available.
fn bracket(len: usize, t: impl Fn(usize) -> f64, span: (f64, f64)) -> (usize, usize) {
    let mut lo = 0;
    let mut hi = len;
    // first index with t > span.0
    let (mut a, mut b) = (0, len);
    while a < b {
        let m = (a + b) / 2;
        if t(m) <= span.0 {
            a = m + 1;
        } else {
            b = m;
        }
    }
    if a > 0 {
        lo = a - 1;
    }
    let (mut a, mut b) = (lo, len);
    while a < b {
        let m = (a + b) / 2;
        if t(m) < span.1 {
            a = m + 1;
        } else {
            b = m;
        }
    }
    if a < len {
        hi = a + 1;
    }
    (lo, hi)
}

/// Every complete window of a session at the given hop.
pub fn session_windows(
    session: &crate::dataio::SessionRecord,
    hop: f64,
    mic_pre: Option<&MicPreTransform>,
) -> Result<Vec<AlignedWindow>> {
    let span = session.common_span().ok_or_else(|| {
        Error::InsufficientData(format!(
            "session {}/{} has no overlapping sensor data",
            session.participant_id, session.scenario
        ))
    })?;
    let (imu, mic) = resample_session_span(session, span, mic_pre)?;
    slice_windows(&imu, &mic, hop)
}

/// The single window ending at `end_t`, resampled directly from raw tracks.
pub fn trailing_window(
    imu_times: &[f64],
    imu: [&[f64]; 3],
    mic_times: &[f64],
    mic: &[f64],
    end_t: f64,
) -> Result<AlignedWindow> {
    let span = (end_t - WINDOW_SECONDS, end_t);
    let (ilo, ihi) = bracket(imu_times.len(), |i| imu_times[i], span);
    let (mlo, mhi) = bracket(mic_times.len(), |i| mic_times[i], span);
    let imu_u = resample_linear(
        &imu_times[ilo..ihi],
        &[&imu[0][ilo..ihi], &imu[1][ilo..ihi], &imu[2][ilo..ihi]],
        IMU_RATE_HZ,
        span,
    )?;
    let mic_u = resample_linear(&mic_times[mlo..mhi], &[&mic[mlo..mhi]], MIC_RATE_HZ, span)?;
    let tail = |c: &Vec<f64>, n: usize| c[c.len() - n..].to_vec();
    AlignedWindow::new(
        end_t,
        [
            tail(&imu_u.channels[0], IMU_WINDOW_LEN),
            tail(&imu_u.channels[1], IMU_WINDOW_LEN),
            tail(&imu_u.channels[2], IMU_WINDOW_LEN),
        ],
        tail(&mic_u.channels[0], MIC_WINDOW_LEN),
    )
}
