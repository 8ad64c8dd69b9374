use proptest::prelude::*;
use waffle::dataio::Scenario;
use waffle::policy::{map_assertiveness, Command, FIXED_INTERVAL_S};
use waffle::sim::{
    generate_dataset, proceeds_while_talking, run_session, step_robot, Controller, DatasetConfig, GenerativeSource,
    OraclePredictor, ParticipantStyle, Phase, RobotEvent, RobotState, SessionSource, SimConfig, TrajectoryConfig,
};

fn source(scenario: Scenario, duration: f64, seed: u64) -> GenerativeSource {
    GenerativeSource {
        participant_id: "P01".into(),
        scenario,
        style: ParticipantStyle::default(),
        duration,
        seed,
    }
}

fn command() -> impl Strategy<Value = Command> {
    prop_oneof![Just(Command::Proceed), Just(Command::Stop), Just(Command::TriggerFullTrajectory)]
}

proptest! {
    #[test]
    fn robot_never_backs_up_mid_approach(cmds in prop::collection::vec(command(), 1..300)) {
        let cfg = TrajectoryConfig::default();
        let mut s = RobotState::start(&cfg);
        let mut last_complete = f64::NEG_INFINITY;
        for cmd in cmds {
            let cmd = if cmd == Command::TriggerFullTrajectory && !s.phase.is_steerable() { Command::Stop } else { cmd };
            let out = step_robot(&s, cmd, &cfg).unwrap();
            let n = out.state;
            prop_assert!(n.distance_to_mouth >= 0.0);
            prop_assert!((n.clock - n.tick as f64 * cfg.control_dt).abs() < 1e-12);
            if s.phase.is_steerable() && n.phase.is_steerable() {
                prop_assert!(n.distance_to_mouth <= s.distance_to_mouth);
            }
            if out.advanced {
                prop_assert!(n.distance_to_mouth < s.distance_to_mouth);
            }
            if n.phase != s.phase {
                prop_assert_eq!(n.phase, s.phase.next());
            }
            if let Some(RobotEvent::BiteComplete(b)) = out.event {
                prop_assert!(b.staging_arrival_t < b.feeding_arrival_t && b.feeding_arrival_t < b.bite_complete_t);
                prop_assert!(b.staging_arrival_t >= last_complete);
                last_complete = b.bite_complete_t;
            }
            s = n;
        }
    }
}

#[test]
fn stop_holds_the_robot_in_place() {
    let cfg = TrajectoryConfig::default();
    let mut s = RobotState::start(&cfg);
    while s.phase != Phase::AtStaging {
        s = step_robot(&s, Command::Stop, &cfg).unwrap().state;
    }
    for _ in 0..20 {
        let out = step_robot(&s, Command::Stop, &cfg).unwrap();
        assert!(!out.advanced);
        assert_eq!(out.state.distance_to_mouth, s.distance_to_mouth);
        s = out.state;
    }
    assert_eq!(s.phase, Phase::AtStaging);
}

#[test]
fn sessions_replay_identically() {
    let sim = SimConfig::default();
    let run = |seed| {
        run_session(
            &Controller::Oracle,
            SessionSource::Generative(source(Scenario::Social, 90.0, seed)),
            &sim,
        )
        .unwrap()
    };
    let (a, b, c) = (run(3), run(3), run(4));
    assert_eq!(a, b);
    assert_ne!(a.record, c.record);
    a.record.validate().unwrap();
    assert!(a.script.as_ref().unwrap().is_well_formed());

    let replay = run_session(
        &Controller::Oracle,
        SessionSource::Recorded {
            session: &a.record,
            script: a.script.as_ref(),
        },
        &sim,
    )
    .unwrap();
    assert_eq!(replay.log.bites, a.log.bites);
}

#[test]
fn baselines_follow_their_schedules() {
    let sim = SimConfig::default();
    let always = run_session(
        &Controller::AlwaysFeed,
        SessionSource::Generative(source(Scenario::Individual, 120.0, 1)),
        &sim,
    )
    .unwrap();
    assert_eq!(always.log.summary().stop, 0);
    let starts: Vec<f64> = always.log.bites.iter().map(|b| b.staging_arrival_t).collect();
    assert!(starts.windows(2).all(|w| (w[1] - w[0] - 16.0).abs() < 1e-9));

    let fixed = run_session(
        &Controller::FixedInterval {
            interval: FIXED_INTERVAL_S,
        },
        SessionSource::Generative(source(Scenario::Social, 150.0, 2)),
        &sim,
    )
    .unwrap();
    assert_eq!(fixed.log.triggers, vec![45.0, 90.0, 135.0]);
    assert_eq!(fixed.log.bites.len(), 3);
    for (b, t) in fixed.log.bites.iter().zip(&fixed.log.triggers) {
        assert!(b.staging_arrival_t <= *t && *t < b.feeding_arrival_t);
    }

    let mouth = run_session(
        &Controller::MouthOpen,
        SessionSource::Generative(source(Scenario::Individual, 120.0, 3)),
        &sim,
    )
    .unwrap();
    assert!(!mouth.log.triggers.is_empty());
    for t in &mouth.log.triggers {
        let tick = mouth.log.ticks.iter().find(|k| k.t == *t).unwrap();
        assert_eq!(tick.phase, Phase::AtStaging);
    }
}

#[test]
fn oracle_predictor_waits_out_conversation() {
    let cfg = DatasetConfig {
        participants: 4,
        individual_duration: 60.0,
        social_duration: 150.0,
        ..DatasetConfig::default()
    };
    let sessions = generate_dataset(&cfg, waffle::parallel::Execution::default()).unwrap();
    let mut social = 0;
    for s in sessions.iter().filter(|s| s.record.scenario == Scenario::Social) {
        let script = s.script.clone().unwrap();
        let predictor = OraclePredictor::new(script.clone());
        let out = run_session(
            &Controller::Waffle {
                predictor: &predictor,
                threshold: map_assertiveness(3).unwrap(),
            },
            SessionSource::Recorded {
                session: &s.record,
                script: Some(&script),
            },
            &SimConfig::default(),
        )
        .unwrap();
        assert!(proceeds_while_talking(&out.log, &script).is_empty());
        assert!(out.log.commit_violations().is_empty());
        assert!(!out.log.bites.is_empty());
        social += 1;
    }
    assert_eq!(social, 4);
}
