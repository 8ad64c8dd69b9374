//! Session records, the line-delimited session file format and label derivation.
//!
//! A session file starts with a header line
//!
//! ```text
//! {"schema":"waffle/1","participant":"P01","scenario":"individual"}
//! ```
//!
//! followed by one JSON object per line, each tagged with a `track`:
//!
//! | track    | fields                                                        | units            |
//! |----------|---------------------------------------------------------------|------------------|
//! | `imu`    | `t`, `ax`, `ay`, `az`, `qw`, `qx`, `qy`, `qz`                  | s, m/s², unit quaternion |
//! | `mic`    | `t`, `amp`                                                    | s, amplitude in [-1, 1] |
//! | `bite`   | `staging_arrival_t`, `feeding_arrival_t`, `bite_complete_t`    | s                |
//! | `motion` | `t`, `moving` (0 = robot stopped, 1 = robot proceeding)        | s                |
//! | `policy` | `t`, `policy`, `command`, `y_hat`, `distance`, `phase`         | s, -, -, s, m, - |
//!
//! Timestamps are session-relative seconds. Records of different tracks may
//! be interleaved; within a track they must be strictly increasing. The
//! `policy` track only appears in simulator logs and is ignored by
//! [`load_dataset`].
//!
//! A dataset manifest is a text file listing one session file path per line,
//! relative to the manifest's directory. Blank lines and lines starting with
//! `#` are skipped.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SESSION_SCHEMA: &str = "waffle/1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuSample {
    pub t: f64,
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
    pub qw: f64,
    pub qx: f64,
    pub qy: f64,
    pub qz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicSample {
    pub t: f64,
    pub amp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiteEvent {
    pub staging_arrival_t: f64,
    pub feeding_arrival_t: f64,
    pub bite_complete_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionLabelSample {
    pub t: f64,
    pub moving: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Individual,
    Social,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Individual => "individual",
            Scenario::Social => "social",
        })
    }
}

/// One dining session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecord {
    pub participant_id: String,
    pub scenario: Scenario,
    pub imu: Vec<ImuSample>,
    pub mic: Vec<MicSample>,
    pub bites: Vec<BiteEvent>,
    pub motion: Vec<MotionLabelSample>,
}

/// One line of the `policy` track written by the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRecord {
    pub t: f64,
    pub policy: String,
    pub command: String,
    pub y_hat: Option<f64>,
    pub distance: f64,
    pub phase: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    schema: String,
    participant: String,
    scenario: Scenario,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "track", rename_all = "lowercase")]
enum Line {
    Imu(ImuSample),
    Mic(MicSample),
    Bite(BiteEvent),
    Motion(MotionLabelSample),
    Policy(PolicyRecord),
}

#[derive(Serialize)]
#[serde(tag = "track", rename_all = "lowercase")]
enum LineRef<'a> {
    Imu(&'a ImuSample),
    Mic(&'a MicSample),
    Bite(&'a BiteEvent),
    Motion(&'a MotionLabelSample),
    Policy(&'a PolicyRecord),
}

impl SessionRecord {
    /// Start and end of the span covered by both sensor tracks.
    pub fn common_span(&self) -> Option<(f64, f64)> {
        let (i0, i1) = (self.imu.first()?.t, self.imu.last()?.t);
        let (m0, m1) = (self.mic.first()?.t, self.mic.last()?.t);
        let t0 = i0.max(m0);
        let t1 = i1.min(m1);
        (t1 >= t0).then_some((t0, t1))
    }

    /// Checks every record invariant.
    pub fn validate(&self) -> Result<()> {
        let ctx = format!("session {}/{}", self.participant_id, self.scenario);
        let err = |track: &str, index: usize, message: String| Error::Validation {
            context: ctx.clone(),
            track: track.to_string(),
            index,
            message,
        };
        if self.participant_id.is_empty() {
            return Err(err("header", 0, "participant id is empty".into()));
        }
        check_times(self.imu.iter().map(|s| s.t)).map_err(|(i, m)| err("imu", i, m))?;
        check_times(self.mic.iter().map(|s| s.t)).map_err(|(i, m)| err("mic", i, m))?;
        check_times(self.motion.iter().map(|s| s.t)).map_err(|(i, m)| err("motion", i, m))?;
        for (i, s) in self.imu.iter().enumerate() {
            let vals = [s.ax, s.ay, s.az, s.qw, s.qx, s.qy, s.qz];
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(err("imu", i, "non-finite value".into()));
            }
            let norm = (s.qw * s.qw + s.qx * s.qx + s.qy * s.qy + s.qz * s.qz).sqrt();
            if (norm - 1.0).abs() > 1e-3 {
                return Err(err("imu", i, format!("quaternion norm {norm} not within 1e-3 of 1")));
            }
        }
        for (i, s) in self.mic.iter().enumerate() {
            if !(s.amp.abs() <= 1.0) {
                return Err(err("mic", i, format!("amplitude {} outside [-1, 1]", s.amp)));
            }
        }
        for (i, s) in self.motion.iter().enumerate() {
            if s.moving > 1 {
                return Err(err("motion", i, format!("moving must be 0 or 1, got {}", s.moving)));
            }
        }
        let mut prev_complete = f64::NEG_INFINITY;
        for (i, b) in self.bites.iter().enumerate() {
            let ordered = b.staging_arrival_t < b.feeding_arrival_t
                && b.feeding_arrival_t < b.bite_complete_t;
            if !ordered || !b.staging_arrival_t.is_finite() || !b.bite_complete_t.is_finite() {
                return Err(err("bite", i, "expected staging < feeding < complete".into()));
            }
            if b.staging_arrival_t < prev_complete {
                return Err(err("bite", i, "overlaps the previous bite".into()));
            }
            prev_complete = b.bite_complete_t;
        }
        Ok(())
    }

    /// Seconds from `window_end_t` until the next feeding-position arrival,
    /// or `None` when no bite follows.
    pub fn time_to_bite(&self, window_end_t: f64) -> Option<f64> {
        derive_time_to_bite(self, window_end_t)
    }
}

fn check_times(ts: impl Iterator<Item = f64>) -> std::result::Result<(), (usize, String)> {
    let mut prev = f64::NEG_INFINITY;
    for (i, t) in ts.enumerate() {
        if !t.is_finite() || t < 0.0 {
            return Err((i, format!("timestamp {t} must be finite and >= 0")));
        }
        if t <= prev {
            return Err((i, format!("timestamp {t} not after previous {prev}")));
        }
        prev = t;
    }
    Ok(())
}

/// Time from `window_end_t` to the earliest feeding arrival at or after it.
pub fn derive_time_to_bite(session: &SessionRecord, window_end_t: f64) -> Option<f64> {
    session
        .bites
        .iter()
        .map(|b| b.feeding_arrival_t)
        .filter(|&a| a >= window_end_t)
        .min_by(f64::total_cmp)
        .map(|a| a - window_end_t)
}

/// Zero-order hold over the motion track: the latest sample with `sample.t <= t`.
pub fn motion_label_at(session: &SessionRecord, t: f64) -> Option<u8> {
    let idx = session.motion.partition_point(|s| s.t <= t);
    idx.checked_sub(1).map(|i| session.motion[i].moving)
}

fn sort_key(s: &SessionRecord) -> (&str, Scenario) {
    (s.participant_id.as_str(), s.scenario)
}

/// Writes one session file. `policy` lines are appended after the sensor tracks.
pub fn write_session(path: &Path, session: &SessionRecord, policy: &[PolicyRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_session_to(&mut w, session, policy).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_session_to<W: Write>(
    w: &mut W,
    session: &SessionRecord,
    policy: &[PolicyRecord],
) -> std::io::Result<()> {
    let header = Header {
        schema: SESSION_SCHEMA.to_string(),
        participant: session.participant_id.clone(),
        scenario: session.scenario,
    };
    put(w, &header)?;
    for s in &session.imu {
        put(w, &LineRef::Imu(s))?;
    }
    for s in &session.mic {
        put(w, &LineRef::Mic(s))?;
    }
    for b in &session.bites {
        put(w, &LineRef::Bite(b))?;
    }
    for m in &session.motion {
        put(w, &LineRef::Motion(m))?;
    }
    for p in policy {
        put(w, &LineRef::Policy(p))?;
    }
    Ok(())
}

fn put<W: Write, T: Serialize>(w: &mut W, value: &T) -> std::io::Result<()> {
    serde_json::to_writer(&mut *w, value).map_err(std::io::Error::other)?;
    w.write_all(b"\n")
}

/// A parsed session file, including any simulator `policy` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionFile {
    pub record: SessionRecord,
    pub policy: Vec<PolicyRecord>,
}

pub fn read_session(path: &Path) -> Result<SessionFile> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_session_from(BufReader::new(file), path)
}

pub fn read_session_from<R: BufRead>(reader: R, path: &Path) -> Result<SessionFile> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = reader.lines();
    let first = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(path, e))?,
        None => return Err(parse_err(1, "empty file, expected header".into())),
    };
    let value: serde_json::Value =
        serde_json::from_str(&first).map_err(|e| parse_err(1, e.to_string()))?;
    match value.get("schema").and_then(|v| v.as_str()) {
        Some(SESSION_SCHEMA) => {}
        Some(other) => {
            return Err(Error::Version {
                found: other.to_string(),
                expected: SESSION_SCHEMA.to_string(),
            })
        }
        None => return Err(parse_err(1, "header has no schema field".into())),
    }
    let header: Header = serde_json::from_value(value).map_err(|e| parse_err(1, e.to_string()))?;

    let mut record = SessionRecord {
        participant_id: header.participant,
        scenario: header.scenario,
        imu: Vec::new(),
        mic: Vec::new(),
        bites: Vec::new(),
        motion: Vec::new(),
    };
    let mut policy = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line =
            serde_json::from_str(&line).map_err(|e| parse_err(line_no, e.to_string()))?;
        match parsed {
            Line::Imu(s) => record.imu.push(s),
            Line::Mic(s) => record.mic.push(s),
            Line::Bite(b) => record.bites.push(b),
            Line::Motion(m) => record.motion.push(m),
            Line::Policy(p) => policy.push(p),
        }
    }
    record.validate().map_err(|e| match e {
        Error::Validation {
            track,
            index,
            message,
            ..
        } => Error::Validation {
            context: path.display().to_string(),
            track,
            index,
            message,
        },
        other => other,
    })?;
    Ok(SessionFile { record, policy })
}

/// Session file paths listed in a manifest, resolved against its directory.
pub fn read_manifest(path: &Path) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| base.join(l))
        .collect())
}

pub fn write_manifest(path: &Path, entries: &[PathBuf]) -> Result<()> {
    let mut text = String::new();
    for e in entries {
        text.push_str(&e.to_string_lossy());
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Loads every session named by a manifest file, or a single session file.
///
/// Sessions come back sorted by participant id, then scenario.
pub fn load_dataset(path: &Path) -> Result<Vec<SessionRecord>> {
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
        ));
    }
    let is_session = {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut first = String::new();
        BufReader::new(file)
            .read_line(&mut first)
            .map_err(|e| Error::io(path, e))?;
        first.trim_start().starts_with('{')
    };
    let mut sessions = if is_session {
        vec![read_session(path)?.record]
    } else {
        read_manifest(path)?
            .iter()
            .map(|p| read_session(p).map(|f| f.record))
            .collect::<Result<Vec<_>>>()?
    };
    sessions.sort_by(|a, b| sort_key(a).cmp(&sort_key(b)));
    Ok(sessions)
}

/// Writes each session to `dir/<participant>_<scenario>.jsonl` plus a
/// `manifest.txt`, returning the manifest path.
pub fn write_dataset(dir: &Path, sessions: &[SessionRecord]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(sessions.len());
    for s in sessions {
        let name = format!("{}_{}.jsonl", s.participant_id, s.scenario);
        write_session(&dir.join(&name), s, &[])?;
        entries.push(PathBuf::from(name));
    }
    let manifest = dir.join("manifest.txt");
    write_manifest(&manifest, &entries)?;
    Ok(manifest)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn imu(t: f64) -> ImuSample {
        ImuSample {
            t,
            ax: 0.1,
            ay: -0.2,
            az: 9.81,
            qw: 1.0,
            qx: 0.0,
            qy: 0.0,
            qz: 0.0,
        }
    }

    pub(crate) fn tiny_session(id: &str, scenario: Scenario) -> SessionRecord {
        SessionRecord {
            participant_id: id.to_string(),
            scenario,
            imu: (0..5).map(|i| imu(i as f64 * 0.005)).collect(),
            mic: (0..3).map(|i| MicSample { t: i as f64 * 0.01, amp: 0.25 * i as f64 }).collect(),
            bites: vec![
                BiteEvent { staging_arrival_t: 10.0, feeding_arrival_t: 20.0, bite_complete_t: 22.0 },
                BiteEvent { staging_arrival_t: 40.0, feeding_arrival_t: 55.0, bite_complete_t: 57.0 },
            ],
            motion: vec![
                MotionLabelSample { t: 1.0, moving: 1 },
                MotionLabelSample { t: 3.0, moving: 0 },
            ],
        }
    }

    #[test]
    fn time_to_bite_examples() {
        let s = tiny_session("P1", Scenario::Individual);
        assert_eq!(derive_time_to_bite(&s, 20.0), Some(0.0));
        assert_eq!(derive_time_to_bite(&s, 12.0), Some(8.0));
        assert_eq!(derive_time_to_bite(&s, 30.0), Some(25.0));
        assert_eq!(derive_time_to_bite(&s, 55.5), None);
    }

    #[test]
    fn time_to_bite_decreases_linearly_between_bites() {
        let s = tiny_session("P1", Scenario::Individual);
        let a = derive_time_to_bite(&s, 23.0).unwrap();
        let b = derive_time_to_bite(&s, 23.0 + 4.5).unwrap();
        assert_eq!(a - b, 4.5);
    }

    #[test]
    fn motion_hold() {
        let s = tiny_session("P1", Scenario::Individual);
        assert_eq!(motion_label_at(&s, 2.0), Some(1));
        assert_eq!(motion_label_at(&s, 3.0), Some(0));
        assert_eq!(motion_label_at(&s, 0.5), None);
        assert_eq!(motion_label_at(&s, 100.0), Some(0));
    }

    #[test]
    fn validation_catches_bad_quaternion_and_amp() {
        let mut s = tiny_session("P1", Scenario::Individual);
        s.imu[1].qw = 0.9;
        assert!(matches!(s.validate(), Err(Error::Validation { index: 1, .. })));
        let mut s = tiny_session("P1", Scenario::Individual);
        s.mic[2].amp = 1.5;
        assert!(matches!(s.validate(), Err(Error::Validation { index: 2, .. })));
        let mut s = tiny_session("P1", Scenario::Individual);
        s.bites[1].staging_arrival_t = 21.0;
        assert!(s.validate().is_err());
        let mut s = tiny_session("", Scenario::Individual);
        s.participant_id.clear();
        assert!(s.validate().is_err());
    }

    #[test]
    fn roundtrip_in_memory() {
        let s = tiny_session("P1", Scenario::Social);
        let policy = vec![PolicyRecord {
            t: 1.5,
            policy: "waffle".into(),
            command: "stop".into(),
            y_hat: Some(7.25),
            distance: 0.381,
            phase: "at_staging".into(),
        }];
        let mut buf = Vec::new();
        write_session_to(&mut buf, &s, &policy).unwrap();
        let back = read_session_from(&buf[..], Path::new("mem")).unwrap();
        assert_eq!(back.record, s);
        assert_eq!(back.policy, policy);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let text = "{\"schema\":\"waffle/1\",\"participant\":\"P\",\"scenario\":\"social\"}\n\
                    {\"track\":\"mic\",\"t\":0.0,\"amp\":0.1}\n\
                    {\"track\":\"mic\",\"t\":0.1,\"amp\":\n";
        match read_session_from(text.as_bytes(), Path::new("f.jsonl")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_schema_is_a_version_error() {
        let text = "{\"schema\":\"waffle/2\",\"participant\":\"P\",\"scenario\":\"social\"}\n";
        assert!(matches!(
            read_session_from(text.as_bytes(), Path::new("f")),
            Err(Error::Version { .. })
        ));
    }

    #[test]
    fn non_monotone_imu_is_rejected_at_index() {
        let mut s = tiny_session("P1", Scenario::Individual);
        s.imu = [0.0, 0.5, 0.4].iter().map(|&t| imu(t)).collect();
        let mut buf = Vec::new();
        write_session_to(&mut buf, &s, &[]).unwrap();
        match read_session_from(&buf[..], Path::new("f")) {
            Err(Error::Validation { track, index, .. }) => {
                assert_eq!(track, "imu");
                assert_eq!(index, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
