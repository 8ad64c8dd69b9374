//! Wizard-of-Oz labeling rules as a first-match priority list.

use serde::{Deserialize, Serialize};

use super::behavior::{BehaviorState, Cues};
use crate::dataio::Scenario;
use crate::policy::Command;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cue {
    Glancing,
    Refusing,
    NotChewing,
    AlmostDoneChewing,
    Chewing,
    AlmostDoneTalking,
    Talking,
    PartnerAlmostDone,
    PartnerTalking,
}

impl Cue {
    pub fn holds(self, c: &Cues) -> bool {
        match self {
            Cue::Glancing => c.glancing,
            Cue::Refusing => c.state == BehaviorState::HeadMotion,
            Cue::NotChewing => c.state != BehaviorState::Chewing,
            Cue::AlmostDoneChewing => c.almost_done_chewing,
            Cue::Chewing => c.state == BehaviorState::Chewing,
            Cue::AlmostDoneTalking => c.almost_done_talking,
            Cue::Talking => c.state == BehaviorState::Talking,
            Cue::PartnerAlmostDone => c.partner_almost_done,
            Cue::PartnerTalking => c.partner_talking,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub cue: Cue,
    pub command: Command,
}

const fn rule(cue: Cue, command: Command) -> Rule {
    Rule { cue, command }
}

const INDIVIDUAL: [Rule; 5] = [
    rule(Cue::Glancing, Command::Proceed),
    rule(Cue::Refusing, Command::Stop),
    rule(Cue::NotChewing, Command::Proceed),
    rule(Cue::AlmostDoneChewing, Command::Proceed),
    rule(Cue::Chewing, Command::Stop),
];

const SOCIAL: [Rule; 8] = [
    rule(Cue::Refusing, Command::Stop),
    rule(Cue::AlmostDoneTalking, Command::Proceed),
    rule(Cue::Talking, Command::Stop),
    rule(Cue::PartnerAlmostDone, Command::Stop),
    rule(Cue::PartnerTalking, Command::Proceed),
    rule(Cue::NotChewing, Command::Proceed),
    rule(Cue::AlmostDoneChewing, Command::Proceed),
    rule(Cue::Chewing, Command::Stop),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleLabeler {
    pub rules: Vec<Rule>,
}

impl OracleLabeler {
    pub fn individual() -> Self {
        Self { rules: INDIVIDUAL.to_vec() }
    }

    pub fn social() -> Self {
        Self { rules: SOCIAL.to_vec() }
    }

    pub fn for_scenario(scenario: Scenario) -> Self {
        match scenario {
            Scenario::Individual => Self::individual(),
            Scenario::Social => Self::social(),
        }
    }

    /// First matching rule's command and its index. The final chewing /
    /// not-chewing pair makes every list exhaustive.
    pub fn decide(&self, cues: &Cues) -> (Command, usize) {
        self.rules
            .iter()
            .enumerate()
            .find(|(_, r)| r.cue.holds(cues))
            .map(|(i, r)| (r.command, i))
            .unwrap_or((Command::Stop, self.rules.len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cues(state: BehaviorState) -> Cues {
        Cues {
            state,
            glancing: false,
            almost_done_chewing: false,
            almost_done_talking: false,
            partner_talking: false,
            partner_almost_done: false,
        }
    }

    #[test]
    fn individual_priorities() {
        let o = OracleLabeler::individual();
        assert_eq!(o.decide(&cues(BehaviorState::Chewing)).0, Command::Stop);
        assert_eq!(o.decide(&cues(BehaviorState::Idle)).0, Command::Proceed);
        assert_eq!(o.decide(&cues(BehaviorState::HeadMotion)).0, Command::Stop);
        let glance_while_chewing = Cues {
            glancing: true,
            ..cues(BehaviorState::Chewing)
        };
        assert_eq!(o.decide(&glance_while_chewing), (Command::Proceed, 0));
        let light = Cues {
            almost_done_chewing: true,
            ..cues(BehaviorState::Chewing)
        };
        assert_eq!(o.decide(&light), (Command::Proceed, 3));
    }

    #[test]
    fn social_priorities() {
        let o = OracleLabeler::social();
        let partner = Cues {
            partner_talking: true,
            ..cues(BehaviorState::Chewing)
        };
        assert_eq!(o.decide(&partner), (Command::Proceed, 4));
        let winding = Cues {
            partner_almost_done: true,
            ..partner
        };
        assert_eq!(o.decide(&winding), (Command::Stop, 3));
        assert_eq!(o.decide(&cues(BehaviorState::Talking)), (Command::Stop, 2));
        let trailing = Cues {
            almost_done_talking: true,
            ..cues(BehaviorState::Talking)
        };
        assert_eq!(o.decide(&trailing).0, Command::Proceed);
    }

    #[test]
    fn exactly_one_rule_fires_first() {
        let states = [
            BehaviorState::Idle,
            BehaviorState::Chewing,
            BehaviorState::Talking,
            BehaviorState::HeadMotion,
        ];
        for o in [OracleLabeler::individual(), OracleLabeler::social()] {
            for s in states {
                for bits in 0..32u8 {
                    let c = Cues {
                        state: s,
                        glancing: bits & 1 != 0,
                        almost_done_chewing: bits & 2 != 0 && s == BehaviorState::Chewing,
                        almost_done_talking: bits & 4 != 0 && s == BehaviorState::Talking,
                        partner_talking: bits & 8 != 0,
                        partner_almost_done: bits & 16 != 0 && bits & 8 != 0,
                    };
                    let (_, i) = o.decide(&c);
                    assert!(i < o.rules.len());
                    assert!(o.rules[..i].iter().all(|r| !r.cue.holds(&c)));
                }
            }
        }
    }
}
