//! The commit-and-guess game: player 1 commits to κ bits, player 2 guesses.
//!
//! Three phases, one round each. In the ideal variant player 2 sees only an
//! opaque receipt; in the real variant a truncated-hash digest, which a
//! brute-force guesser can invert when κ is small.

use std::sync::Arc;

use rand::Rng;

use crate::crypto::HashCommitment;
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::runtime::{
    ComputationalGame, Endpoint, Envelope, FunctionalityHub, FunctionalityImpl, Message, Outcome,
    Payload, PlayerCtrl, RoundOutput, SlotMap, Strategy,
};

pub const COMMITMENT_SLOT: &str = "commitment";
const COMMITTER: usize = 0;
const GUESSER: usize = 1;

/// κ-bit value space: the committer's x and guesser's y live in [0, 2^κ).
fn value_cap(kappa: u32) -> u64 {
    if kappa >= 64 {
        u64::MAX
    } else {
        (1u64 << kappa) - 1
    }
}

struct GuessingHub {
    kappa: u32,
    scheme: FunctionalityImpl,
    x: Option<u64>,
    y: Option<u64>,
}

impl GuessingHub {
    fn expect_uint(
        actions: &[Vec<Message>],
        player: usize,
        round: u32,
        cap: u64,
        what: &str,
    ) -> Result<u64> {
        let v = actions[player]
            .iter()
            .find(|m| m.to == Endpoint::Hub)
            .and_then(|m| m.payload.as_uint())
            .ok_or_else(|| Error::MalformedAction {
                player,
                round,
                detail: format!("expected {what} sent to the hub"),
            })?;
        if v > cap {
            return Err(Error::MalformedAction {
                player,
                round,
                detail: format!("{what} {v} exceeds {} bits", cap.count_ones()),
            });
        }
        Ok(v)
    }
}

impl FunctionalityHub for GuessingHub {
    fn init(&mut self, _rng: &mut Stream) -> Result<Vec<Vec<Envelope>>> {
        Ok(vec![Vec::new(), Vec::new()])
    }

    fn round(&mut self, round: u32, actions: &[Vec<Message>], rng: &mut Stream) -> Result<RoundOutput> {
        let cap = value_cap(self.kappa);
        match round {
            // commit phase: record x, send the receipt to the guesser
            1 => {
                let x = Self::expect_uint(actions, COMMITTER, round, cap, "a committed value")?;
                self.x = Some(x);
                let receipt = match &self.scheme {
                    FunctionalityImpl::IdealCommitment => Payload::Uint(0),
                    FunctionalityImpl::HashCommitment { lambda } => {
                        let scheme = HashCommitment::new(self.kappa as u16, *lambda)?;
                        let r = rng.gen::<u64>() & value_cap(*lambda as u32);
                        Payload::Bytes(scheme.commit(x, r)?.to_vec())
                    }
                };
                Ok(RoundOutput {
                    deliveries: vec![Vec::new(), vec![Envelope {
                        from: Endpoint::Hub,
                        payload: receipt,
                    }]],
                    terminal: None,
                })
            }
            // guess phase
            2 => {
                let y = Self::expect_uint(actions, GUESSER, round, cap, "a guess")?;
                self.y = Some(y);
                Ok(RoundOutput {
                    deliveries: vec![Vec::new(), Vec::new()],
                    terminal: None,
                })
            }
            // reveal phase: Bit(1) opens; Null or Abort withholds
            3 => {
                let opened = match actions[COMMITTER].iter().find(|m| m.to == Endpoint::Hub) {
                    Some(m) => match &m.payload {
                        Payload::Bit(1) => true,
                        Payload::Bit(0) | Payload::Null | Payload::Abort => false,
                        other => {
                            return Err(Error::MalformedAction {
                                player: COMMITTER,
                                round,
                                detail: format!("expected open/withhold, got {other:?}"),
                            })
                        }
                    },
                    None => false,
                };
                let x = self.x.expect("commit recorded in round 1");
                let y = self.y.expect("guess recorded in round 2");
                Ok(RoundOutput {
                    deliveries: vec![Vec::new(), Vec::new()],
                    terminal: Some(Outcome {
                        label: if opened { "opened" } else { "withheld" }.into(),
                        data: Payload::List(vec![
                            Payload::Uint(x),
                            Payload::Uint(y),
                            Payload::Bit(opened as u8),
                        ]),
                    }),
                })
            }
            _ => Err(Error::Protocol(format!("guessing game has 3 rounds, got {round}"))),
        }
    }
}

fn outcome_parts(outcome: &Outcome) -> (u64, u64, bool) {
    match &outcome.data {
        Payload::List(items) if items.len() == 3 => (
            items[0].as_uint().expect("x"),
            items[1].as_uint().expect("y"),
            items[2].as_bit().expect("opened flag") == 1,
        ),
        _ => unreachable!("guessing outcome malformed"),
    }
}

/// The guessing game with an ideal commitment slot; substitute
/// [`COMMITMENT_SLOT`] with a hash commitment to obtain the real variant.
pub fn make_guessing_game() -> ComputationalGame {
    ComputationalGame::new(
        "guessing",
        2,
        |kappa, slots: &SlotMap, _rng| {
            let scheme = slots
                .get(COMMITMENT_SLOT)
                .cloned()
                .ok_or_else(|| Error::Config("commitment slot missing".into()))?;
            if kappa == 0 || kappa > 63 {
                return Err(Error::Domain(format!("kappa={kappa} outside 1..=63")));
            }
            if let FunctionalityImpl::HashCommitment { .. } = &scheme {
                if kappa > 24 {
                    return Err(Error::Capacity {
                        what: "guessing game value bits under hash commitments",
                        required: kappa as u128,
                        cap: 24,
                    });
                }
            }
            Ok(Box::new(GuessingHub {
                kappa,
                scheme,
                x: None,
                y: None,
            }) as Box<dyn FunctionalityHub>)
        },
        |_| 16,
        |player, transcript| {
            // zero sum in every outcome: withholding costs the committer 1
            let (x, y, opened) = outcome_parts(&transcript.outcome);
            let u2 = if !opened {
                1.0
            } else if x == y {
                2.0f64.powi(transcript.kappa as i32)
            } else {
                0.0
            };
            if player == GUESSER {
                u2
            } else {
                -u2
            }
        },
        |kappa| 2.0f64.powi(kappa as i32),
    )
    .with_slot(COMMITMENT_SLOT, FunctionalityImpl::IdealCommitment)
}

// ---------------------------------------------------------------------------
// strategies

struct UniformCommitterCtrl {
    kappa: u32,
}

impl PlayerCtrl for UniformCommitterCtrl {
    fn act(&mut self, round: u32, _inbox: &[Envelope], rng: &mut Stream) -> Result<Action> {
        Ok(match round {
            1 => vec![hub_msg(Payload::Uint(rng.gen::<u64>() & value_cap(self.kappa)))],
            3 => vec![hub_msg(Payload::Bit(1))],
            _ => vec![hub_msg(Payload::Null)],
        })
    }
}

type Action = Vec<Message>;

fn hub_msg(payload: Payload) -> Message {
    Message {
        to: Endpoint::Hub,
        payload,
    }
}

struct GuessCtrl<G> {
    guess: G,
}

impl<G> PlayerCtrl for GuessCtrl<G>
where
    G: FnMut(&[Envelope], &mut Stream) -> u64,
{
    fn act(&mut self, round: u32, inbox: &[Envelope], rng: &mut Stream) -> Result<Action> {
        Ok(match round {
            2 => vec![hub_msg(Payload::Uint((self.guess)(inbox, rng)))],
            _ => vec![hub_msg(Payload::Null)],
        })
    }
}

struct SimpleStrategy<F> {
    name: String,
    make: F,
}

impl<F> Strategy for SimpleStrategy<F>
where
    F: Fn(u32) -> Box<dyn PlayerCtrl> + Send + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn instantiate(&self, kappa: u32, _player: usize) -> Box<dyn PlayerCtrl> {
        (self.make)(kappa)
    }
}

/// Player 1: uniform x, always opens.
pub fn uniform_committer() -> Arc<dyn Strategy> {
    Arc::new(SimpleStrategy {
        name: "uniform-committer".into(),
        make: |kappa| Box::new(UniformCommitterCtrl { kappa }) as Box<dyn PlayerCtrl>,
    })
}

/// Player 1 variant that never opens (ideal-game penalty demonstration).
pub fn withholding_committer() -> Arc<dyn Strategy> {
    Arc::new(SimpleStrategy {
        name: "withholding-committer".into(),
        make: |kappa| {
            Box::new(GuardedCommitter { kappa }) as Box<dyn PlayerCtrl>
        },
    })
}

struct GuardedCommitter {
    kappa: u32,
}

impl PlayerCtrl for GuardedCommitter {
    fn act(&mut self, round: u32, _inbox: &[Envelope], rng: &mut Stream) -> Result<Action> {
        Ok(match round {
            1 => vec![hub_msg(Payload::Uint(rng.gen::<u64>() & value_cap(self.kappa)))],
            _ => vec![hub_msg(Payload::Null)],
        })
    }
}

/// Player 2: uniform guess, ignoring the receipt.
pub fn uniform_guesser() -> Arc<dyn Strategy> {
    Arc::new(SimpleStrategy {
        name: "uniform-guesser".into(),
        make: |kappa| {
            Box::new(GuessCtrl {
                guess: move |_inbox: &[Envelope], rng: &mut Stream| {
                    rng.gen::<u64>() & value_cap(kappa)
                },
            }) as Box<dyn PlayerCtrl>
        },
    })
}

/// Player 2: always guess `y0` (reduced modulo the value space).
pub fn fixed_guesser(y0: u64) -> Arc<dyn Strategy> {
    Arc::new(SimpleStrategy {
        name: format!("fixed-guesser:{y0}"),
        make: move |kappa| {
            Box::new(GuessCtrl {
                guess: move |_inbox: &[Envelope], _rng: &mut Stream| y0 & value_cap(kappa),
            }) as Box<dyn PlayerCtrl>
        },
    })
}

/// Player 2: brute-force the observed digest within `budget` commit
/// evaluations; fall back to a uniform guess when nothing is recovered.
/// Only meaningful in the real variant (the ideal receipt carries nothing).
pub fn brute_force_guesser(lambda: u16, budget: u64) -> Result<Arc<dyn Strategy>> {
    if budget == 0 {
        return Err(Error::Domain("brute force budget must be positive".into()));
    }
    if budget > 1 << 48 {
        return Err(Error::Capacity {
            what: "brute force budget",
            required: budget as u128,
            cap: 1 << 48,
        });
    }
    Ok(Arc::new(SimpleStrategy {
        name: format!("brute-force-guesser:{budget}"),
        make: move |kappa| {
            Box::new(GuessCtrl {
                guess: move |inbox: &[Envelope], rng: &mut Stream| {
                    let digest = inbox.iter().find_map(|e| e.payload.as_bytes());
                    if let Some(d) = digest {
                        if d.len() == 16 {
                            let mut c = [0u8; 16];
                            c.copy_from_slice(d);
                            if let Ok(scheme) = HashCommitment::new(kappa as u16, lambda) {
                                if let Ok(Some((x, _r))) = scheme.brute_force_open(&c, budget) {
                                    return x;
                                }
                            }
                        }
                    }
                    rng.gen::<u64>() & value_cap(kappa)
                },
            }) as Box<dyn PlayerCtrl>
        },
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::{play_once, substitute_functionality, utility_ensemble};

    #[test]
    fn ideal_play_zero_sum_and_in_support() {
        let game = make_guessing_game();
        let profile = vec![uniform_committer(), uniform_guesser()];
        for seed in 0..50 {
            let t = play_once(&game, &profile, 4, seed).unwrap();
            assert_eq!(t.utilities[0] + t.utilities[1], 0.0);
            assert!(t.utilities[1] == 0.0 || t.utilities[1] == 16.0);
            assert_eq!(t.rounds.len(), 3);
        }
    }

    #[test]
    fn ideal_receipt_carries_nothing() {
        let game = make_guessing_game();
        let profile = vec![fixed_committer_for_test(7), uniform_guesser()];
        let profile2 = vec![fixed_committer_for_test(200), uniform_guesser()];
        let a = play_once(&game, &profile, 8, 3).unwrap();
        let b = play_once(&game, &profile2, 8, 3).unwrap();
        assert_eq!(a.rounds[0].deliveries, b.rounds[0].deliveries);
    }

    fn fixed_committer_for_test(x: u64) -> Arc<dyn Strategy> {
        Arc::new(SimpleStrategy {
            name: format!("fixed-committer:{x}"),
            make: move |_kappa| {
                Box::new(FixedCommitter { x }) as Box<dyn PlayerCtrl>
            },
        })
    }

    struct FixedCommitter {
        x: u64,
    }

    impl PlayerCtrl for FixedCommitter {
        fn act(&mut self, round: u32, _inbox: &[Envelope], _rng: &mut Stream) -> Result<Action> {
            Ok(match round {
                1 => vec![hub_msg(Payload::Uint(self.x))],
                3 => vec![hub_msg(Payload::Bit(1))],
                _ => vec![hub_msg(Payload::Null)],
            })
        }
    }

    #[test]
    fn withholding_costs_one() {
        let game = make_guessing_game();
        let profile = vec![withholding_committer(), uniform_guesser()];
        let t = play_once(&game, &profile, 4, 11).unwrap();
        assert_eq!(t.utilities[0], -1.0);
        assert_eq!(t.utilities[1], 1.0);
    }

    #[test]
    fn uniform_profile_mean_is_one() {
        // E[u₂] = 2^κ·2^{−κ} = 1 exactly; check Monte-Carlo at κ=6
        let game = make_guessing_game();
        let profile = vec![uniform_committer(), uniform_guesser()];
        let e = utility_ensemble(&game, &profile, 1).unwrap();
        let mut rng = crate::rng::stream(41, &[0]);
        let n = 40_000;
        let mean: f64 = (0..n).map(|_| e.sample(6, &mut rng)).sum::<f64>() / n as f64;
        // u₂ is 64 w.p. 1/64: sd ≈ 7.9, 3σ over 4e4 samples ≈ 0.12
        assert!((mean - 1.0).abs() < 0.15, "mean {mean}");
    }

    #[test]
    fn brute_force_wins_real_variant() {
        let game = substitute_functionality(
            &make_guessing_game(),
            COMMITMENT_SLOT,
            FunctionalityImpl::HashCommitment { lambda: 8 },
        )
        .unwrap();
        let profile = vec![
            uniform_committer(),
            brute_force_guesser(8, 1 << 16).unwrap(),
        ];
        for seed in 0..20 {
            let t = play_once(&game, &profile, 8, seed).unwrap();
            assert_eq!(t.utilities[1], 256.0, "attack must recover x (seed {seed})");
        }
    }

    #[test]
    fn real_variant_kappa_cap() {
        let game = substitute_functionality(
            &make_guessing_game(),
            COMMITMENT_SLOT,
            FunctionalityImpl::HashCommitment { lambda: 16 },
        )
        .unwrap();
        let profile = vec![uniform_committer(), uniform_guesser()];
        assert!(play_once(&game, &profile, 32, 0).is_err());
        assert!(play_once(&game, &profile, 16, 0).is_ok());
    }

    #[test]
    fn unknown_slot_substitution_fails() {
        let game = make_guessing_game();
        assert!(substitute_functionality(&game, "nosuch", FunctionalityImpl::IdealCommitment).is_err());
    }
}
