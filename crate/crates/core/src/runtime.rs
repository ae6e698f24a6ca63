//! Synchronous protocol-game runtime.
//!
//! A game is n strategy machines linked through a functionality hub. Each
//! round, all players' actions are collected before anything is delivered,
//! so no round-t view contains another player's round-t action. The hub
//! routes messages, enforces game rules, and declares the terminal outcome;
//! utilities are pure functions of the finished transcript.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dominance::{
    em_dominance_score_tagged, DominanceParams, DominanceReport, UtilityEnsemble, Verdict,
};
use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

const TAG_PLAY: u64 = 3;
const TAG_ENSEMBLE: u64 = 4;
const TAG_EXPECT: u64 = 5;

// ---------------------------------------------------------------------------
// messages

/// One message body. `Null` is the explicit empty message ∅; `Abort` is ⊥.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "t", content = "v")]
pub enum Payload {
    Null,
    Abort,
    Bit(u8),
    Uint(u64),
    Int(i64),
    Real(f64),
    Bytes(Vec<u8>),
    List(Vec<Payload>),
}

impl Payload {
    pub fn is_abort(&self) -> bool {
        matches!(self, Payload::Abort)
    }

    pub fn as_bit(&self) -> Option<u8> {
        match self {
            Payload::Bit(b) if *b <= 1 => Some(*b),
            _ => None,
        }
    }

    pub fn as_uint(&self) -> Option<u64> {
        match self {
            Payload::Uint(u) => Some(*u),
            _ => None,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Payload::Real(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_bytes(&self) -> Option<&[u8]> {
        match self {
            Payload::Bytes(b) => Some(b),
            _ => None,
        }
    }
}

/// Message destination or origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "t", content = "v")]
pub enum Endpoint {
    Player(usize),
    /// The functionality hub itself (auctioneer, commitment machine, ...).
    Hub,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub to: Endpoint,
    pub payload: Payload,
}

/// A delivered message, as seen in a player's inbox.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub from: Endpoint,
    pub payload: Payload,
}

/// Everything one player emits in one round.
pub type Action = Vec<Message>;

// ---------------------------------------------------------------------------
// hub

/// Terminal outcome ω of a play.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub label: String,
    pub data: Payload,
}

pub struct RoundOutput {
    /// Inbox contents per player, visible from the next round on.
    pub deliveries: Vec<Vec<Envelope>>,
    pub terminal: Option<Outcome>,
}

/// The linked functionality machines of one play: message router, rule
/// enforcer, and terminal-condition judge. One instance per play, never
/// shared.
pub trait FunctionalityHub {
    /// Deliveries available to players before round 1 (setup inputs).
    fn init(&mut self, rng: &mut Stream) -> Result<Vec<Vec<Envelope>>>;

    /// Consume all round-t actions at once; produce deliveries and,
    /// possibly, the terminal outcome.
    fn round(&mut self, round: u32, actions: &[Action], rng: &mut Stream) -> Result<RoundOutput>;
}

/// Named choice of concrete machinery behind a functionality slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FunctionalityImpl {
    IdealCommitment,
    HashCommitment { lambda: u16 },
}

pub type SlotMap = BTreeMap<String, FunctionalityImpl>;

// ---------------------------------------------------------------------------
// strategies

/// Per-play instantiation of a strategy: mutable local state plus the
/// round-action callback.
pub trait PlayerCtrl {
    fn act(&mut self, round: u32, inbox: &[Envelope], rng: &mut Stream) -> Result<Action>;
}

/// A strategy machine factory. `instantiate` is called once per play.
pub trait Strategy: Send + Sync {
    fn name(&self) -> &str;
    fn instantiate(&self, kappa: u32, player: usize) -> Box<dyn PlayerCtrl>;
}

/// Strategy built from a plain function; enough for most machines.
pub struct FnStrategy<F> {
    name: String,
    make: F,
}

impl<F> FnStrategy<F>
where
    F: Fn(u32, usize) -> Box<dyn PlayerCtrl> + Send + Sync,
{
    pub fn new(name: impl Into<String>, make: F) -> Self {
        Self {
            name: name.into(),
            make,
        }
    }
}

impl<F> Strategy for FnStrategy<F>
where
    F: Fn(u32, usize) -> Box<dyn PlayerCtrl> + Send + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn instantiate(&self, kappa: u32, player: usize) -> Box<dyn PlayerCtrl> {
        (self.make)(kappa, player)
    }
}

/// Stateless controller from a closure.
pub struct FnCtrl<F>(pub F);

impl<F> PlayerCtrl for FnCtrl<F>
where
    F: FnMut(u32, &[Envelope], &mut Stream) -> Result<Action>,
{
    fn act(&mut self, round: u32, inbox: &[Envelope], rng: &mut Stream) -> Result<Action> {
        (self.0)(round, inbox, rng)
    }
}

// ---------------------------------------------------------------------------
// game

type HubFactory = dyn Fn(u32, &SlotMap, &mut Stream) -> Result<Box<dyn FunctionalityHub>>
    + Send
    + Sync;
type UtilityFn = dyn Fn(usize, &PlayTranscript) -> f64 + Send + Sync;
type KappaFn = dyn Fn(u32) -> f64 + Send + Sync;
type RoundsFn = dyn Fn(u32) -> u32 + Send + Sync;

#[derive(Clone)]
pub struct ComputationalGame {
    name: String,
    player_count: usize,
    hub_factory: Arc<HubFactory>,
    max_rounds: Arc<RoundsFn>,
    utility: Arc<UtilityFn>,
    utility_range: Arc<KappaFn>,
    slots: SlotMap,
}

impl ComputationalGame {
    pub fn new(
        name: impl Into<String>,
        player_count: usize,
        hub_factory: impl Fn(u32, &SlotMap, &mut Stream) -> Result<Box<dyn FunctionalityHub>>
            + Send
            + Sync
            + 'static,
        max_rounds: impl Fn(u32) -> u32 + Send + Sync + 'static,
        utility: impl Fn(usize, &PlayTranscript) -> f64 + Send + Sync + 'static,
        utility_range: impl Fn(u32) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            player_count,
            hub_factory: Arc::new(hub_factory),
            max_rounds: Arc::new(max_rounds),
            utility: Arc::new(utility),
            utility_range: Arc::new(utility_range),
            slots: SlotMap::new(),
        }
    }

    pub fn with_slot(mut self, name: impl Into<String>, imp: FunctionalityImpl) -> Self {
        self.slots.insert(name.into(), imp);
        self
    }

    pub fn with_max_rounds(mut self, f: impl Fn(u32) -> u32 + Send + Sync + 'static) -> Self {
        self.max_rounds = Arc::new(f);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn player_count(&self) -> usize {
        self.player_count
    }

    pub fn max_rounds(&self, kappa: u32) -> u32 {
        (self.max_rounds)(kappa)
    }

    pub fn utility(&self, player: usize, transcript: &PlayTranscript) -> f64 {
        (self.utility)(player, transcript)
    }

    pub fn utility_range(&self, kappa: u32) -> f64 {
        (self.utility_range)(kappa)
    }

    pub fn slot(&self, name: &str) -> Option<&FunctionalityImpl> {
        self.slots.get(name)
    }
}

/// Replace the implementation behind a named functionality slot; the
/// strategies' message interface is unchanged.
pub fn substitute_functionality(
    game: &ComputationalGame,
    slot_name: &str,
    implementation: FunctionalityImpl,
) -> Result<ComputationalGame> {
    let mut out = game.clone();
    match out.slots.get_mut(slot_name) {
        Some(slot) => {
            *slot = implementation;
            Ok(out)
        }
        None => Err(Error::Config(format!(
            "game '{}' has no functionality slot named '{slot_name}'",
            game.name
        ))),
    }
}

// ---------------------------------------------------------------------------
// transcript

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u32,
    pub actions: Vec<Action>,
    pub deliveries: Vec<Vec<Envelope>>,
}

/// Full seeded record of one play; (game, profile, κ, seed) regenerate it
/// bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayTranscript {
    pub kappa: u32,
    pub seed: u64,
    /// Deliveries made available before round 1.
    pub setup: Vec<Vec<Envelope>>,
    pub rounds: Vec<RoundRecord>,
    pub outcome: Outcome,
    pub utilities: Vec<f64>,
}

impl PlayTranscript {
    /// One-play JSON line for offline inspection.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("transcript serializes")
    }
}

// ---------------------------------------------------------------------------
// execution

/// Run one play to termination under a synchronous round loop.
pub fn play_once(
    game: &ComputationalGame,
    profile: &[Arc<dyn Strategy>],
    kappa: u32,
    seed: u64,
) -> Result<PlayTranscript> {
    let n = game.player_count;
    if profile.len() != n {
        return Err(Error::Config(format!(
            "game '{}' needs {n} strategies, got {}",
            game.name,
            profile.len()
        )));
    }

    let mut hub_rng = stream(seed, &[TAG_PLAY, 0]);
    let mut player_rngs: Vec<Stream> = (0..n)
        .map(|i| stream(seed, &[TAG_PLAY, 1 + i as u64]))
        .collect();
    let mut hub = (game.hub_factory)(kappa, &game.slots, &mut hub_rng)?;
    let mut ctrls: Vec<Box<dyn PlayerCtrl>> = profile
        .iter()
        .enumerate()
        .map(|(i, s)| s.instantiate(kappa, i))
        .collect();

    let setup = hub.init(&mut hub_rng)?;
    let mut inboxes = setup.clone();
    if inboxes.len() != n {
        return Err(Error::Config(format!(
            "hub produced {} setup inboxes for {n} players",
            inboxes.len()
        )));
    }

    let cap = game.max_rounds(kappa);
    let mut rounds = Vec::new();
    let outcome = loop {
        let round = rounds.len() as u32 + 1;
        if round > cap {
            return Err(Error::RoundCapExceeded { round, cap });
        }
        // simultaneity: collect every action before the hub sees any
        let mut actions: Vec<Action> = Vec::with_capacity(n);
        for (i, ctrl) in ctrls.iter_mut().enumerate() {
            actions.push(ctrl.act(round, &inboxes[i], &mut player_rngs[i])?);
        }
        let out = hub.round(round, &actions, &mut hub_rng)?;
        if out.deliveries.len() != n {
            return Err(Error::Config(format!(
                "hub delivered to {} inboxes for {n} players",
                out.deliveries.len()
            )));
        }
        rounds.push(RoundRecord {
            round,
            actions,
            deliveries: out.deliveries.clone(),
        });
        if let Some(outcome) = out.terminal {
            break outcome;
        }
        inboxes = out.deliveries;
    };

    let mut transcript = PlayTranscript {
        kappa,
        seed,
        setup,
        rounds,
        outcome,
        utilities: vec![0.0; n],
    };
    for i in 0..n {
        transcript.utilities[i] = game.utility(i, &transcript);
    }
    Ok(transcript)
}

/// Adapt a (game, profile, player) triple into a sampler of that player's
/// realized utility. Each sample plays once under a fresh seed drawn from
/// the caller's stream.
pub fn utility_ensemble(
    game: &ComputationalGame,
    profile: &[Arc<dyn Strategy>],
    player: usize,
) -> Result<UtilityEnsemble> {
    if player >= game.player_count {
        return Err(Error::Config(format!(
            "player {player} out of range for {}-player game",
            game.player_count
        )));
    }
    if profile.len() != game.player_count {
        return Err(Error::Config("profile length mismatch".into()));
    }
    let game = game.clone();
    let profile: Vec<Arc<dyn Strategy>> = profile.to_vec();
    let range_game = game.clone();
    let name = format!(
        "game:{}:{}:{player}",
        game.name,
        profile.iter().map(|s| s.name()).collect::<Vec<_>>().join("+")
    );
    Ok(UtilityEnsemble::new(name, move |kappa, rng| {
        let seed = crate::rng::derive_seed(rng.next_u64(), &[TAG_ENSEMBLE]);
        let t = play_once(&game, &profile, kappa, seed)
            .unwrap_or_else(|e| panic!("play failed while sampling utility: {e}"));
        t.utilities[player]
    })
    .with_support_bound(move |kappa| range_game.utility_range(kappa)))
}

// ---------------------------------------------------------------------------
// equilibrium checks

/// One candidate unilateral deviation: `player` swaps in `strategy`.
#[derive(Clone)]
pub struct Deviation {
    pub player: usize,
    pub strategy: Arc<dyn Strategy>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PseudoNashReport {
    pub player: usize,
    pub deviation: String,
    #[serde(flatten)]
    pub report: DominanceReport,
}

/// Dominance check of the profile's utility against each candidate
/// deviation's, per player. The profile passes iff every report's verdict
/// is DOMINATES. A refuter/validator over the supplied candidates only;
/// nothing is quantified over all machines.
pub fn check_pseudo_nash(
    game: &ComputationalGame,
    profile: &[Arc<dyn Strategy>],
    deviations: &[Deviation],
    params: &DominanceParams,
) -> Result<Vec<PseudoNashReport>> {
    if deviations.is_empty() {
        return Err(Error::Config("no candidate deviations supplied".into()));
    }
    let mut out = Vec::with_capacity(deviations.len());
    for dev in deviations {
        if dev.player >= game.player_count {
            return Err(Error::Config(format!(
                "deviation targets player {} of {}-player game",
                dev.player, game.player_count
            )));
        }
        let x = utility_ensemble(game, profile, dev.player)?;
        let mut deviated = profile.to_vec();
        deviated[dev.player] = dev.strategy.clone();
        let y = utility_ensemble(game, &deviated, dev.player)?;
        let report = em_dominance_score_tagged(&x, &y, params, 0, 1)?;
        out.push(PseudoNashReport {
            player: dev.player,
            deviation: dev.strategy.name().to_string(),
            report,
        });
    }
    Ok(out)
}

pub fn pseudo_nash_pass(reports: &[PseudoNashReport]) -> bool {
    reports.iter().all(|r| r.report.verdict == Verdict::Dominates)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExpectationVerdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpectationReport {
    pub player: usize,
    pub deviation: String,
    pub mean_profile: f64,
    pub mean_deviation: f64,
    pub gap: f64,
    pub ci_half_width: f64,
    pub verdict: ExpectationVerdict,
}

/// Monte-Carlo expected-utility comparison: FAIL when the deviation beats
/// the profile by more than ε with 3σ margin.
pub fn check_expectation_nash(
    game: &ComputationalGame,
    profile: &[Arc<dyn Strategy>],
    deviations: &[Deviation],
    kappa: u32,
    sample_count: u32,
    epsilon: f64,
    seed: u64,
) -> Result<Vec<ExpectationReport>> {
    if sample_count < 1000 {
        return Err(Error::Domain(format!(
            "need at least 1000 samples (got {sample_count})"
        )));
    }
    let mean_and_se = |prof: &[Arc<dyn Strategy>], player: usize, arm: u64| -> Result<(f64, f64)> {
        let sums = (0..sample_count)
            .into_par_iter()
            .map(|i| {
                let play_seed =
                    crate::rng::derive_seed(seed, &[TAG_EXPECT, kappa as u64, arm, i as u64]);
                play_once(game, prof, kappa, play_seed).map(|t| {
                    let u = t.utilities[player];
                    (u, u * u)
                })
            })
            .try_reduce(|| (0.0, 0.0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
        let n = sample_count as f64;
        let mean = sums.0 / n;
        let var = (sums.1 / n - mean * mean).max(0.0);
        Ok((mean, (var / n).sqrt()))
    };

    let mut out = Vec::with_capacity(deviations.len());
    for (d_idx, dev) in deviations.iter().enumerate() {
        let arm = 2 * d_idx as u64;
        let (mean_profile, se_p) = mean_and_se(profile, dev.player, arm)?;
        let mut deviated = profile.to_vec();
        deviated[dev.player] = dev.strategy.clone();
        let (mean_deviation, se_d) = mean_and_se(&deviated, dev.player, arm + 1)?;
        let gap = mean_deviation - mean_profile;
        let ci_half_width = 3.0 * (se_p * se_p + se_d * se_d).sqrt();
        let verdict = if gap - ci_half_width > epsilon {
            ExpectationVerdict::Fail
        } else {
            ExpectationVerdict::Pass
        };
        out.push(ExpectationReport {
            player: dev.player,
            deviation: dev.strategy.name().to_string(),
            mean_profile,
            mean_deviation,
            gap,
            ci_half_width,
            verdict,
        });
    }
    Ok(out)
}
