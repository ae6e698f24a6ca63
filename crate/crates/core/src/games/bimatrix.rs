//! One-round two-player matrix games, used as the standard-game testbed
//! where expectation-Nash and pseudo-Nash must agree.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::runtime::{
    ComputationalGame, Endpoint, Envelope, FnCtrl, FnStrategy, FunctionalityHub, Message, Outcome,
    Payload, RoundOutput, SlotMap, Strategy,
};
use crate::rng::Stream;

/// Payoff matrix: `payoffs[a0][a1] = (u0, u1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bimatrix {
    pub payoffs: Vec<Vec<(f64, f64)>>,
}

impl Bimatrix {
    pub fn new(payoffs: Vec<Vec<(f64, f64)>>) -> Result<Self> {
        if payoffs.is_empty() || payoffs[0].is_empty() {
            return Err(Error::Domain("payoff matrix must be nonempty".into()));
        }
        let cols = payoffs[0].len();
        if payoffs.iter().any(|row| row.len() != cols) {
            return Err(Error::Domain("payoff matrix rows have unequal lengths".into()));
        }
        Ok(Self { payoffs })
    }

    pub fn actions(&self, player: usize) -> usize {
        match player {
            0 => self.payoffs.len(),
            _ => self.payoffs[0].len(),
        }
    }

    pub fn range(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in &self.payoffs {
            for &(a, b) in row {
                lo = lo.min(a).min(b);
                hi = hi.max(a).max(b);
            }
        }
        hi - lo
    }

    /// Exact expected utility of `player` under independent mixed actions.
    pub fn exact_expected_utility(&self, mix0: &[f64], mix1: &[f64], player: usize) -> Result<f64> {
        check_mix(mix0, self.actions(0))?;
        check_mix(mix1, self.actions(1))?;
        let mut acc = 0.0;
        for (a0, &p0) in mix0.iter().enumerate() {
            for (a1, &p1) in mix1.iter().enumerate() {
                let (u0, u1) = self.payoffs[a0][a1];
                acc += p0 * p1 * if player == 0 { u0 } else { u1 };
            }
        }
        Ok(acc)
    }
}

fn check_mix(mix: &[f64], actions: usize) -> Result<()> {
    if mix.len() != actions {
        return Err(Error::Domain(format!(
            "mixed strategy has {} entries for {actions} actions",
            mix.len()
        )));
    }
    if mix.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::Domain("mixed strategy entries must be in [0,1]".into()));
    }
    let total: f64 = mix.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("mixed strategy sums to {total}")));
    }
    Ok(())
}

struct BimatrixHub {
    actions_per_player: [usize; 2],
}

impl FunctionalityHub for BimatrixHub {
    fn init(&mut self, _rng: &mut Stream) -> Result<Vec<Vec<Envelope>>> {
        Ok(vec![Vec::new(), Vec::new()])
    }

    fn round(&mut self, round: u32, actions: &[Vec<Message>], _rng: &mut Stream) -> Result<RoundOutput> {
        let mut chosen = [0u64; 2];
        for (i, action) in actions.iter().enumerate() {
            let a = action
                .iter()
                .find(|m| m.to == Endpoint::Hub)
                .and_then(|m| m.payload.as_uint())
                .ok_or_else(|| Error::MalformedAction {
                    player: i,
                    round,
                    detail: "expected one action index sent to the hub".into(),
                })?;
            if a as usize >= self.actions_per_player[i] {
                return Err(Error::MalformedAction {
                    player: i,
                    round,
                    detail: format!("action {a} out of range"),
                });
            }
            chosen[i] = a;
        }
        Ok(RoundOutput {
            deliveries: vec![Vec::new(), Vec::new()],
            terminal: Some(Outcome {
                label: "played".into(),
                data: Payload::List(vec![Payload::Uint(chosen[0]), Payload::Uint(chosen[1])]),
            }),
        })
    }
}

fn outcome_actions(outcome: &Outcome) -> (usize, usize) {
    match &outcome.data {
        Payload::List(items) => match (items[0].as_uint(), items[1].as_uint()) {
            (Some(a), Some(b)) => (a as usize, b as usize),
            _ => unreachable!("bimatrix outcome malformed"),
        },
        _ => unreachable!("bimatrix outcome malformed"),
    }
}

/// Encode a matrix game as a one-round computational game. Utilities are
/// constant in κ.
pub fn make_bimatrix_game(name: impl Into<String>, matrix: Bimatrix) -> ComputationalGame {
    let rows = matrix.actions(0);
    let cols = matrix.actions(1);
    let util_matrix = matrix.clone();
    let range = matrix.range();
    ComputationalGame::new(
        name,
        2,
        move |_kappa, _slots: &SlotMap, _rng| {
            Ok(Box::new(BimatrixHub {
                actions_per_player: [rows, cols],
            }) as Box<dyn FunctionalityHub>)
        },
        |_| 16,
        move |player, transcript| {
            let (a0, a1) = outcome_actions(&transcript.outcome);
            let (u0, u1) = util_matrix.payoffs[a0][a1];
            if player == 0 {
                u0
            } else {
                u1
            }
        },
        move |_| range,
    )
}

/// Mixed action: sample an index from `probs` each play.
pub fn mixed(name: impl Into<String>, probs: Vec<f64>) -> Arc<dyn Strategy> {
    let name = name.into();
    Arc::new(FnStrategy::new(name, move |_kappa, _player| {
        let probs = probs.clone();
        Box::new(FnCtrl(move |_round, _inbox: &[Envelope], rng: &mut Stream| {
            let u: f64 = rng.gen();
            let mut cum = 0.0;
            let mut pick = probs.len() - 1;
            for (i, &p) in probs.iter().enumerate() {
                cum += p;
                if u < cum {
                    pick = i;
                    break;
                }
            }
            Ok(vec![Message {
                to: Endpoint::Hub,
                payload: Payload::Uint(pick as u64),
            }])
        })) as Box<dyn crate::runtime::PlayerCtrl>
    }))
}

/// Always play action `a`.
pub fn pure(a: usize) -> Arc<dyn Strategy> {
    let mut probs = vec![0.0; a + 1];
    probs[a] = 1.0;
    mixed(format!("pure:{a}"), probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dominance::DominanceParams;
    use crate::runtime::{
        check_pseudo_nash, play_once, pseudo_nash_pass, utility_ensemble, Deviation,
    };

    fn matching_pennies() -> Bimatrix {
        Bimatrix::new(vec![
            vec![(1.0, -1.0), (-1.0, 1.0)],
            vec![(-1.0, 1.0), (1.0, -1.0)],
        ])
        .unwrap()
    }

    #[test]
    fn play_is_deterministic_and_in_support() {
        let game = make_bimatrix_game("pennies", matching_pennies());
        let profile = vec![mixed("half", vec![0.5, 0.5]), mixed("half", vec![0.5, 0.5])];
        let a = play_once(&game, &profile, 4, 99).unwrap();
        let b = play_once(&game, &profile, 4, 99).unwrap();
        assert_eq!(a.to_json_line(), b.to_json_line());
        assert!(a.utilities[0] == 1.0 || a.utilities[0] == -1.0);
        assert_eq!(a.utilities[0] + a.utilities[1], 0.0);
    }

    #[test]
    fn exact_expectation_matches_monte_carlo() {
        let m = matching_pennies();
        let game = make_bimatrix_game("pennies", m.clone());
        let profile = vec![mixed("skew", vec![0.7, 0.3]), mixed("half", vec![0.5, 0.5])];
        let e = utility_ensemble(&game, &profile, 0).unwrap();
        let exact = m.exact_expected_utility(&[0.7, 0.3], &[0.5, 0.5], 0).unwrap();
        let mut rng = crate::rng::stream(3, &[0]);
        let n = 20_000;
        let mean: f64 = (0..n).map(|_| e.sample(4, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - exact).abs() < 0.03, "mean {mean}, exact {exact}");
    }

    #[test]
    fn mixed_pennies_profile_passes_pseudo_check() {
        // tie case: every deviation has the same expectation, score ≈ 0
        let game = make_bimatrix_game("pennies", matching_pennies());
        let profile = vec![mixed("half", vec![0.5, 0.5]), mixed("half", vec![0.5, 0.5])];
        let deviations: Vec<Deviation> = (0..2)
            .flat_map(|player| {
                (0..2).map(move |a| Deviation {
                    player,
                    strategy: pure(a),
                })
            })
            .collect();
        let params = DominanceParams::new(4, 1, 2, 400, 21).unwrap().with_m(64);
        let reports = check_pseudo_nash(&game, &profile, &deviations, &params).unwrap();
        assert_eq!(reports.len(), 4);
        assert!(pseudo_nash_pass(&reports), "{reports:?}");
    }

    #[test]
    fn malformed_action_is_a_fault() {
        let game = make_bimatrix_game("pennies", matching_pennies());
        let bad: Arc<dyn Strategy> = Arc::new(FnStrategy::new("silent", |_, _| {
            Box::new(FnCtrl(|_, _: &[Envelope], _: &mut Stream| Ok(Vec::new())))
                as Box<dyn crate::runtime::PlayerCtrl>
        }));
        let profile = vec![bad, pure(0)];
        match play_once(&game, &profile, 4, 1) {
            Err(Error::MalformedAction { player: 0, round: 1, .. }) => {}
            other => panic!("expected malformed action fault, got {other:?}"),
        }
    }
}
