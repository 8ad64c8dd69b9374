use std::io::Cursor;
use std::path::Path;

use proptest::prelude::*;
use waffle::dataio::{
    load_dataset, read_session_from, write_dataset, write_session_to, BiteEvent, ImuSample, MicSample,
    MotionLabelSample, PolicyRecord, Scenario, SessionRecord,
};
use waffle::Error;

fn quat(yaw: f64) -> (f64, f64, f64, f64) {
    ((yaw / 2.0).cos(), 0.0, 0.0, (yaw / 2.0).sin())
}

prop_compose! {
    fn session()(
        n_imu in 2usize..60,
        n_mic in 2usize..60,
        accel in prop::collection::vec(-50.0f64..50.0, 180),
        yaws in prop::collection::vec(-3.0f64..3.0, 60),
        amps in prop::collection::vec(-1.0f64..=1.0, 60),
        moving in prop::collection::vec(0u8..=1, 1..30),
        bites in 0usize..4,
        social in any::<bool>(),
        pid in "[A-Z][0-9]{2}",
    ) -> SessionRecord {
        let imu = (0..n_imu).map(|i| {
            let (qw, qx, qy, qz) = quat(yaws[i]);
            ImuSample { t: i as f64 * 0.005, ax: accel[3 * i], ay: accel[3 * i + 1], az: accel[3 * i + 2], qw, qx, qy, qz }
        }).collect();
        let mic = (0..n_mic).map(|i| MicSample { t: i as f64 * 0.002 + 0.001, amp: amps[i] }).collect();
        let motion = moving.iter().enumerate().map(|(i, &m)| MotionLabelSample { t: i as f64 * 0.5, moving: m }).collect();
        let bites = (0..bites).map(|k| {
            let s = 16.0 * k as f64 + 4.0;
            BiteEvent { staging_arrival_t: s, feeding_arrival_t: s + 8.0, bite_complete_t: s + 10.0 }
        }).collect();
        SessionRecord {
            participant_id: pid,
            scenario: if social { Scenario::Social } else { Scenario::Individual },
            imu, mic, bites, motion,
        }
    }
}

fn encode(s: &SessionRecord, policy: &[PolicyRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_session_to(&mut buf, s, policy).unwrap();
    buf
}

fn decode(bytes: &[u8]) -> waffle::Result<waffle::dataio::SessionFile> {
    read_session_from(Cursor::new(bytes), Path::new("mem.jsonl"))
}

proptest! {
    #[test]
    fn round_trip_is_exact(s in session()) {
        let policy = vec![PolicyRecord {
            t: 0.5,
            policy: "waffle".into(),
            command: "stop".into(),
            y_hat: Some(7.123456789012345),
            distance: 0.381,
            phase: "at_staging".into(),
        }];
        let back = decode(&encode(&s, &policy)).unwrap();
        prop_assert_eq!(&back.record, &s);
        prop_assert_eq!(&back.policy, &policy);
        let again = encode(&back.record, &back.policy);
        prop_assert_eq!(again, encode(&s, &back.policy));
    }
}

fn base() -> SessionRecord {
    let imu = (0..10)
        .map(|i| ImuSample {
            t: i as f64 * 0.005,
            ax: 0.0,
            ay: 0.0,
            az: 9.81,
            qw: 1.0,
            qx: 0.0,
            qy: 0.0,
            qz: 0.0,
        })
        .collect();
    let mic = (0..10).map(|i| MicSample { t: i as f64 * 0.01, amp: 0.0 }).collect();
    SessionRecord {
        participant_id: "P01".into(),
        scenario: Scenario::Individual,
        imu,
        mic,
        bites: vec![],
        motion: vec![],
    }
}

fn text(s: &SessionRecord) -> String {
    String::from_utf8(encode(s, &[])).unwrap()
}

#[test]
fn rejects_bad_records() {
    let mut s = base();
    s.imu[4].t = s.imu[3].t;
    assert!(matches!(decode(text(&s).as_bytes()), Err(Error::Validation { .. })));

    let mut s = base();
    s.imu[2].qw = 0.9;
    assert!(matches!(decode(text(&s).as_bytes()), Err(Error::Validation { .. })));

    let mut s = base();
    s.mic[1].amp = 1.5;
    assert!(matches!(decode(text(&s).as_bytes()), Err(Error::Validation { .. })));

    let mut s = base();
    s.bites.push(BiteEvent {
        staging_arrival_t: 5.0,
        feeding_arrival_t: 4.0,
        bite_complete_t: 6.0,
    });
    assert!(s.validate().is_err());
}

#[test]
fn rejects_unknown_schema_and_garbage() {
    let good = text(&base());
    let future = good.replacen("waffle/1", "waffle/9", 1);
    assert!(matches!(decode(future.as_bytes()), Err(Error::Version { .. })));

    let mut lines: Vec<&str> = good.lines().collect();
    lines.insert(3, "{\"track\":\"imu\",\"t\":");
    match decode(lines.join("\n").as_bytes()) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected a parse error, got {other:?}"),
    }
    assert!(matches!(decode(b""), Err(Error::Parse { line: 1, .. })));
}

#[test]
fn dataset_directory_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut b = base();
    b.participant_id = "P02".into();
    b.scenario = Scenario::Social;
    let sessions = vec![b, base()];
    let manifest = write_dataset(dir.path(), &sessions).unwrap();
    let back = load_dataset(&manifest).unwrap();
    assert_eq!(back.len(), 2);
    assert_eq!(back[0], sessions[1]);
    assert_eq!(back[1], sessions[0]);

    let single = load_dataset(&dir.path().join("P01_individual.jsonl")).unwrap();
    assert_eq!(single, vec![sessions[1].clone()]);

    std::fs::remove_file(dir.path().join("P02_social.jsonl")).unwrap();
    assert!(matches!(load_dataset(&manifest), Err(Error::Io { .. })));
    assert!(matches!(load_dataset(&dir.path().join("missing.txt")), Err(Error::Io { .. })));
}
