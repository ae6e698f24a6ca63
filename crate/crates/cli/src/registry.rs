//! Name-to-object resolution: ensembles, games, profiles, and deviations
//! are all addressed by stable string names on the command line.

use std::sync::Arc;

use pseudonash::games::{auction, guessing, ht};
use pseudonash::runtime::{
    substitute_functionality, utility_ensemble, ComputationalGame, Deviation, FunctionalityImpl,
    Strategy,
};
use pseudonash::{Error, UtilityEnsemble};

fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Ideal,
    Hash,
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ideal" => Ok(Variant::Ideal),
            "hash" => Ok(Variant::Hash),
            other => Err(format!("unknown variant '{other}' (ideal|hash)")),
        }
    }
}

/// Build a registered game with its commitment slot filled per the variant.
pub fn build_game(
    name: &str,
    variant: Variant,
    lambda: u16,
) -> Result<ComputationalGame, Error> {
    let (game, slot) = match name {
        "guessing" => (guessing::make_guessing_game(), Some(guessing::COMMITMENT_SLOT)),
        "ht" => (ht::make_ht_game(ht::HtConfig::standard())?, None),
        "auction" => (
            auction::make_auction_game(auction::AuctionConfig::standard())?,
            Some(auction::COMMITMENT_SLOT),
        ),
        other => return Err(usage(format!("unknown game '{other}' (guessing|ht|auction)"))),
    };
    match (variant, slot) {
        (Variant::Ideal, _) => Ok(game),
        (Variant::Hash, Some(slot)) => {
            substitute_functionality(&game, slot, FunctionalityImpl::HashCommitment { lambda })
        }
        (Variant::Hash, None) => Err(usage(format!("game '{name}' has no hash variant"))),
    }
}

/// A full strategy profile by name, sized for the game.
pub fn build_profile(game: &str, profile: &str) -> Result<Vec<Arc<dyn Strategy>>, Error> {
    let alpha = pseudonash::analysis::DEFAULT_ALPHA;
    match (game, profile) {
        ("ht", "s-star") => Ok(vec![ht::s_star(alpha); 3]),
        ("ht", "s-hat") => Ok(vec![ht::s_hat(alpha); 3]),
        ("ht", "extend") => Ok(vec![ht::extend_to_8k(alpha); 3]),
        ("guessing", "uniform") => Ok(vec![guessing::uniform_committer(), guessing::uniform_guesser()]),
        ("guessing", "withhold") => Ok(vec![
            guessing::withholding_committer(),
            guessing::uniform_guesser(),
        ]),
        ("auction", "truthful") => Ok(vec![auction::truthful(4); 4]),
        _ => Err(usage(format!("unknown profile '{profile}' for game '{game}'"))),
    }
}

/// One named unilateral deviation. Names follow `kind[:arg]`; the player it
/// applies to is fixed by the kind (committer vs guesser, bidder 0, etc.).
pub fn build_deviation(game: &str, name: &str, lambda: u16) -> Result<Deviation, Error> {
    let alpha = pseudonash::analysis::DEFAULT_ALPHA;
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    let parse_u64 = |what: &str| -> Result<u64, Error> {
        arg.ok_or_else(|| usage(format!("deviation '{head}' needs :{what}")))?
            .parse::<u64>()
            .map_err(|_| usage(format!("deviation '{name}': bad {what}")))
    };
    let dev = |player: usize, strategy: Arc<dyn Strategy>| Deviation { player, strategy };
    match (game, head) {
        ("ht", "withhold") => match arg {
            Some("last") => Ok(dev(0, ht::withhold_last(alpha))),
            Some(_) => {
                let t0 = parse_u64("iteration")? as u32;
                Ok(dev(0, ht::withhold_at(alpha, move |_| t0)))
            }
            None => Err(usage("deviation 'withhold' needs :last or :iteration")),
        },
        ("ht", "extend") => Ok(dev(0, ht::extend_to_8k(alpha))),
        ("ht", "s-hat") => Ok(dev(0, ht::s_hat(alpha))),
        ("ht", "s-star") => Ok(dev(0, ht::s_star(alpha))),
        ("guessing", "fixed") => Ok(dev(1, guessing::fixed_guesser(parse_u64("guess")?))),
        ("guessing", "uniform") => Ok(dev(1, guessing::uniform_guesser())),
        ("guessing", "withhold") => Ok(dev(0, guessing::withholding_committer())),
        ("guessing", "brute") => Ok(dev(1, guessing::brute_force_guesser(lambda, parse_u64("budget")?)?)),
        ("auction", "fixed") => Ok(dev(0, auction::fixed_bid(4, parse_u64("bid")?))),
        ("auction", "truthful-attack") => {
            Ok(dev(0, auction::truthful_plus_attack(4, lambda, parse_u64("budget")?)))
        }
        ("auction", "overbid-attack") => {
            Ok(dev(0, auction::overbid_plus_attack(4, lambda, parse_u64("budget")?)))
        }
        _ => Err(usage(format!("unknown deviation '{name}' for game '{game}'"))),
    }
}

/// Resolve an ensemble name: built-in samplers, parameterized families, or
/// a game-derived utility ensemble `game:<name>:<profile>:<player>`.
pub fn resolve_ensemble(name: &str) -> Result<UtilityEnsemble, Error> {
    match name {
        "example35-x" => return Ok(UtilityEnsemble::example35_x()),
        "example35-y" => return Ok(UtilityEnsemble::example35_y()),
        "uniform02" => return Ok(UtilityEnsemble::uniform_zero_two()),
        _ => {}
    }
    let parts: Vec<&str> = name.split(':').collect();
    match parts.as_slice() {
        ["constant", v] => {
            let v: f64 = v.parse().map_err(|_| usage(format!("bad constant in '{name}'")))?;
            Ok(UtilityEnsemble::constant(v))
        }
        ["bernoulli", p, lo, hi] => {
            let parse = |s: &str| -> Result<f64, Error> {
                s.parse().map_err(|_| usage(format!("bad number in '{name}'")))
            };
            Ok(UtilityEnsemble::bernoulli(parse(p)?, parse(lo)?, parse(hi)?))
        }
        ["game", game, profile, player] => {
            let player: usize = player
                .parse()
                .map_err(|_| usage(format!("bad player index in '{name}'")))?;
            let g = build_game(game, Variant::Ideal, 16)?;
            let profile = build_profile(game, profile)?;
            utility_ensemble(&g, &profile, player)
        }
        _ => Err(usage(format!(
            "unknown ensemble '{name}' (example35-x, example35-y, uniform02, \
             constant:v, bernoulli:p:lo:hi, game:name:profile:player)"
        ))),
    }
}

/// Iteration-level samplers for the secret-sharing strategies; used by
/// --fast runs at κ far beyond round-level reach.
pub fn fast_ht_ensemble(strategy: &str) -> Result<UtilityEnsemble, Error> {
    let alpha = pseudonash::analysis::DEFAULT_ALPHA;
    let sample: Arc<dyn Fn(u32, &mut pseudonash::rng::Stream) -> f64 + Send + Sync> =
        match strategy {
            "s-hat" => Arc::new(move |k, rng| ht::fast_sample_s_hat(k, alpha, rng)),
            "extend" => Arc::new(move |k, rng| ht::fast_sample_extend(k, alpha, rng)),
            "withhold:last" => Arc::new(move |k, rng| ht::fast_sample_withhold_last(k, alpha, rng)),
            other => {
                return Err(usage(format!(
                    "no fast sampler for '{other}' (s-hat, extend, withhold:last)"
                )))
            }
        };
    Ok(
        UtilityEnsemble::new(format!("ht-fast:{strategy}"), move |k, rng| sample(k, rng))
            .with_support_bound(|k| (1u64 << (k + 1).min(63)) as f64 + 2.0),
    )
}
