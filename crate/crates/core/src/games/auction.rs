//! Sealed-bid second-price auction with an information reward.
//!
//! Bids travel through a commitment slot (ideal receipts or hash digests).
//! After the auction each bidder declares a belief vector over who holds
//! the highest value; a reward R is paid with probability
//! q_i = max{x_{i,i*} − 1/(n−1), 0}. Breaking the commitments is the only
//! way a loser can beat random guessing.

use std::sync::Arc;

use rand::Rng;

use crate::crypto::HashCommitment;
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::runtime::{
    ComputationalGame, Endpoint, Envelope, FunctionalityHub, FunctionalityImpl, Message, Outcome,
    Payload, PlayTranscript, PlayerCtrl, RoundOutput, SlotMap, Strategy,
};

pub const COMMITMENT_SLOT: &str = "commitment";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuctionConfig {
    pub bidders: usize,
    /// Values are i.i.d. uniform integers on [0, V].
    pub value_cap: u64,
    /// Information reward R.
    pub reward: f64,
}

impl AuctionConfig {
    pub fn new(bidders: usize, value_cap: u64, reward: f64) -> Result<Self> {
        if bidders < 2 {
            return Err(Error::Domain(format!("need at least 2 bidders, got {bidders}")));
        }
        if reward < 0.0 {
            return Err(Error::Domain("reward must be non-negative".into()));
        }
        Ok(Self {
            bidders,
            value_cap,
            reward,
        })
    }

    /// n = 4, V = 100, R = 10⁴.
    pub fn standard() -> Self {
        Self {
            bidders: 4,
            value_cap: 100,
            reward: 10_000.0,
        }
    }
}

fn bid_cap(kappa: u32) -> u64 {
    if kappa >= 64 {
        u64::MAX
    } else {
        (1u64 << kappa) - 1
    }
}

struct AuctionHub {
    config: AuctionConfig,
    kappa: u32,
    scheme: FunctionalityImpl,
    values: Vec<u64>,
    bids: Vec<u64>,
    opened: Vec<bool>,
}

impl AuctionHub {
    fn winner_and_price(&self) -> (Option<usize>, u64) {
        // lowest index wins ties; price is the second-highest valid bid
        let valid: Vec<(usize, u64)> = (0..self.config.bidders)
            .filter(|&i| self.opened[i])
            .map(|i| (i, self.bids[i]))
            .collect();
        let winner = valid
            .iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|&(i, _)| i);
        let price = match winner {
            Some(w) => valid
                .iter()
                .filter(|&&(i, _)| i != w)
                .map(|&(_, b)| b)
                .max()
                .unwrap_or(0),
            None => 0,
        };
        (winner, price)
    }

    fn highest_value_holder(&self) -> usize {
        let mut best = 0;
        for i in 1..self.config.bidders {
            if self.values[i] > self.values[best] {
                best = i;
            }
        }
        best
    }
}

impl FunctionalityHub for AuctionHub {
    fn init(&mut self, rng: &mut Stream) -> Result<Vec<Vec<Envelope>>> {
        self.values = (0..self.config.bidders)
            .map(|_| rng.gen_range(0..=self.config.value_cap))
            .collect();
        Ok(self
            .values
            .iter()
            .map(|&v| {
                vec![Envelope {
                    from: Endpoint::Hub,
                    payload: Payload::Uint(v),
                }]
            })
            .collect())
    }

    fn round(&mut self, round: u32, actions: &[Vec<Message>], rng: &mut Stream) -> Result<RoundOutput> {
        let n = self.config.bidders;
        match round {
            // commit round: collect bids, broadcast the commitment list
            1 => {
                let cap = bid_cap(self.kappa);
                let mut receipts = Vec::with_capacity(n);
                for (i, action) in actions.iter().enumerate() {
                    let b = action
                        .iter()
                        .find(|m| m.to == Endpoint::Hub)
                        .and_then(|m| m.payload.as_uint())
                        .ok_or_else(|| Error::MalformedAction {
                            player: i,
                            round,
                            detail: "expected a bid sent to the hub".into(),
                        })?;
                    if b > cap {
                        return Err(Error::MalformedAction {
                            player: i,
                            round,
                            detail: format!("bid {b} exceeds {} bits", self.kappa),
                        });
                    }
                    self.bids.push(b);
                    receipts.push(match &self.scheme {
                        FunctionalityImpl::IdealCommitment => Payload::Uint(i as u64),
                        FunctionalityImpl::HashCommitment { lambda } => {
                            let scheme = HashCommitment::new(self.kappa as u16, *lambda)?;
                            let r = rng.gen::<u64>() & bid_cap(*lambda as u32);
                            Payload::Bytes(scheme.commit(b, r)?.to_vec())
                        }
                    });
                }
                let c = Payload::List(receipts);
                Ok(RoundOutput {
                    deliveries: (0..n)
                        .map(|_| {
                            vec![Envelope {
                                from: Endpoint::Hub,
                                payload: c.clone(),
                            }]
                        })
                        .collect(),
                    terminal: None,
                })
            }
            // open round: Bit(1) opens; then the auction runs, price to the
            // winner and ⊥ to everyone else
            2 => {
                for (i, action) in actions.iter().enumerate() {
                    let open = action
                        .iter()
                        .find(|m| m.to == Endpoint::Hub)
                        .map(|m| matches!(m.payload, Payload::Bit(1)))
                        .unwrap_or(false);
                    self.opened[i] = open;
                }
                let (winner, price) = self.winner_and_price();
                Ok(RoundOutput {
                    deliveries: (0..n)
                        .map(|i| {
                            let payload = if Some(i) == winner {
                                Payload::Uint(price)
                            } else {
                                Payload::Null
                            };
                            vec![Envelope {
                                from: Endpoint::Hub,
                                payload,
                            }]
                        })
                        .collect(),
                    terminal: None,
                })
            }
            // declaration round: belief vectors in, reward coins out
            3 => {
                let i_star = self.highest_value_holder();
                let mut rewards = Vec::with_capacity(n);
                let mut beliefs_flat = Vec::with_capacity(n);
                for (i, action) in actions.iter().enumerate() {
                    let beliefs = action
                        .iter()
                        .find(|m| m.to == Endpoint::Hub)
                        .and_then(|m| match &m.payload {
                            Payload::List(items) if items.len() == n => {
                                let xs: Option<Vec<f64>> =
                                    items.iter().map(|p| p.as_real()).collect();
                                xs
                            }
                            _ => None,
                        })
                        .ok_or_else(|| Error::MalformedAction {
                            player: i,
                            round,
                            detail: format!("expected a belief vector of {n} probabilities"),
                        })?;
                    let total: f64 = beliefs.iter().sum();
                    if beliefs.iter().any(|&x| !(0.0..=1.0).contains(&x)) || total > 1.0 + 1e-9 {
                        return Err(Error::MalformedAction {
                            player: i,
                            round,
                            detail: "belief vector is not a subprobability".into(),
                        });
                    }
                    let q = (beliefs[i_star] - 1.0 / (n as f64 - 1.0)).max(0.0);
                    let hit = rng.gen::<f64>() < q;
                    rewards.push(Payload::Bit(hit as u8));
                    beliefs_flat.push(Payload::Real(beliefs[i_star]));
                }
                let (winner, price) = self.winner_and_price();
                Ok(RoundOutput {
                    deliveries: (0..n).map(|_| Vec::new()).collect(),
                    terminal: Some(Outcome {
                        label: "settled".into(),
                        data: Payload::List(vec![
                            match winner {
                                Some(w) => Payload::Uint(w as u64),
                                None => Payload::Null,
                            },
                            Payload::Uint(price),
                            Payload::List(self.values.iter().map(|&v| Payload::Uint(v)).collect()),
                            Payload::List(rewards),
                            Payload::List(beliefs_flat),
                        ]),
                    }),
                })
            }
            _ => Err(Error::Protocol(format!("auction has 3 rounds, got {round}"))),
        }
    }
}

struct AuctionOutcome {
    winner: Option<usize>,
    price: u64,
    values: Vec<u64>,
    rewards: Vec<bool>,
}

fn parse_outcome(outcome: &Outcome) -> AuctionOutcome {
    match &outcome.data {
        Payload::List(items) if items.len() == 5 => AuctionOutcome {
            winner: items[0].as_uint().map(|w| w as usize),
            price: items[1].as_uint().expect("price"),
            values: match &items[2] {
                Payload::List(vs) => vs.iter().map(|p| p.as_uint().expect("value")).collect(),
                _ => unreachable!(),
            },
            rewards: match &items[3] {
                Payload::List(rs) => rs.iter().map(|p| p.as_bit() == Some(1)).collect(),
                _ => unreachable!(),
            },
        },
        _ => unreachable!("auction outcome malformed"),
    }
}

/// Whether each bidder's reward coin came up, read from a transcript.
pub fn outcome_rewards(transcript: &PlayTranscript) -> Vec<bool> {
    parse_outcome(&transcript.outcome).rewards
}

/// Winner index and the price paid.
pub fn outcome_winner_price(transcript: &PlayTranscript) -> (Option<usize>, u64) {
    let o = parse_outcome(&transcript.outcome);
    (o.winner, o.price)
}

/// The auction with an ideal commitment slot; substitute
/// [`COMMITMENT_SLOT`] for the real variant. Bids are κ-bit, so play at
/// κ with 2^κ > V.
pub fn make_auction_game(config: AuctionConfig) -> Result<ComputationalGame> {
    AuctionConfig::new(config.bidders, config.value_cap, config.reward)?;
    let n = config.bidders;
    let reward = config.reward;
    let value_cap = config.value_cap;
    Ok(ComputationalGame::new(
        "auction",
        n,
        move |kappa, slots: &SlotMap, _rng| {
            if bid_cap(kappa) < config.value_cap {
                return Err(Error::Domain(format!(
                    "kappa={kappa} cannot encode values up to {}",
                    config.value_cap
                )));
            }
            let scheme = slots
                .get(COMMITMENT_SLOT)
                .cloned()
                .ok_or_else(|| Error::Config("commitment slot missing".into()))?;
            Ok(Box::new(AuctionHub {
                config,
                kappa,
                scheme,
                values: Vec::new(),
                bids: Vec::new(),
                opened: vec![false; n],
            }) as Box<dyn FunctionalityHub>)
        },
        |_| 16,
        move |player, transcript| {
            let o = parse_outcome(&transcript.outcome);
            let auction_part = if o.winner == Some(player) {
                o.values[player] as f64 - o.price as f64
            } else {
                0.0
            };
            auction_part + if o.rewards[player] { reward } else { 0.0 }
        },
        move |kappa| value_cap as f64 + reward + bid_cap(kappa).min(1 << 32) as f64,
    )
    .with_slot(COMMITMENT_SLOT, FunctionalityImpl::IdealCommitment))
}

// ---------------------------------------------------------------------------
// strategies

/// What a bidder does per phase; shared chassis for all auction strategies.
struct BidderCtrl {
    n: usize,
    kappa: u32,
    player: usize,
    value: u64,
    commitments: Vec<Payload>,
    won_price: Option<u64>,
    bid: BidRule,
    attack: Option<Attack>,
}

enum BidRule {
    Truthful,
    MaxBid,
}

struct Attack {
    lambda: u16,
    budget: u64,
    /// Concentrate belief on the recovered highest bidder (truthful-attack)
    /// or on the bidder whose recovered bid equals the paid price
    /// (overbid-attack).
    target_price: bool,
}

impl BidderCtrl {
    fn beliefs(&self) -> Vec<f64> {
        let me = self.player;
        let n = self.n;
        if self.won_price.is_some() {
            // the winner knows itself; under truthful play it is also the
            // highest-value holder
            let mut x = vec![0.0; n];
            x[me] = 1.0;
            return x;
        }
        if let Some(attack) = &self.attack {
            if let Some(target) = self.run_attack(attack) {
                let mut x = vec![0.0; n];
                x[target] = 1.0;
                return x;
            }
        }
        let mut x = vec![1.0 / (n as f64 - 1.0); n];
        x[me] = 0.0;
        x
    }

    fn run_attack(&self, attack: &Attack) -> Option<usize> {
        let scheme = HashCommitment::new(self.kappa as u16, attack.lambda).ok()?;
        let mut recovered: Vec<(usize, u64)> = Vec::new();
        for (j, c) in self.commitments.iter().enumerate() {
            if j == self.player {
                continue;
            }
            let bytes = c.as_bytes()?;
            if bytes.len() != 16 {
                return None;
            }
            let mut digest = [0u8; 16];
            digest.copy_from_slice(bytes);
            if let Ok(Some((b, _r))) = scheme.brute_force_open(&digest, attack.budget) {
                recovered.push((j, b));
            }
        }
        if attack.target_price {
            let price = self.won_price?;
            recovered.iter().find(|&&(_, b)| b == price).map(|&(j, _)| j)
        } else {
            recovered.iter().max_by_key(|&&(j, b)| (b, usize::MAX - j)).map(|&(j, _)| j)
        }
    }
}

impl PlayerCtrl for BidderCtrl {
    fn act(&mut self, round: u32, inbox: &[Envelope], _rng: &mut Stream) -> Result<Vec<Message>> {
        let hub = |payload| {
            vec![Message {
                to: Endpoint::Hub,
                payload,
            }]
        };
        Ok(match round {
            1 => {
                if let Some(v) = inbox.iter().find_map(|e| e.payload.as_uint()) {
                    self.value = v;
                }
                let bid = match self.bid {
                    BidRule::Truthful => self.value,
                    BidRule::MaxBid => bid_cap(self.kappa),
                };
                hub(Payload::Uint(bid))
            }
            2 => {
                if let Some(Payload::List(items)) = inbox.iter().map(|e| &e.payload).next() {
                    self.commitments = items.clone();
                }
                hub(Payload::Bit(1))
            }
            3 => {
                self.won_price = inbox.iter().find_map(|e| e.payload.as_uint());
                hub(Payload::List(
                    self.beliefs().into_iter().map(Payload::Real).collect(),
                ))
            }
            _ => hub(Payload::Null),
        })
    }
}

struct AuctionStrategy {
    name: String,
    n: usize,
    bid_max: bool,
    attack: Option<(u16, u64, bool)>,
}

impl Strategy for AuctionStrategy {
    fn name(&self) -> &str {
        &self.name
    }

    fn instantiate(&self, kappa: u32, player: usize) -> Box<dyn PlayerCtrl> {
        Box::new(BidderCtrl {
            n: self.n,
            kappa,
            player,
            value: 0,
            commitments: Vec::new(),
            won_price: None,
            bid: if self.bid_max {
                BidRule::MaxBid
            } else {
                BidRule::Truthful
            },
            attack: self.attack.map(|(lambda, budget, target_price)| Attack {
                lambda,
                budget,
                target_price,
            }),
        })
    }
}

/// Bid the private value, open, declare honest beliefs.
pub fn truthful(n: usize) -> Arc<dyn Strategy> {
    Arc::new(AuctionStrategy {
        name: "truthful".into(),
        n,
        bid_max: false,
        attack: None,
    })
}

/// Truthful bidding plus a post-auction brute-force attack on the observed
/// commitments; belief concentrates on the recovered highest bidder.
pub fn truthful_plus_attack(n: usize, lambda: u16, budget: u64) -> Arc<dyn Strategy> {
    Arc::new(AuctionStrategy {
        name: format!("truthful-attack:{budget}"),
        n,
        bid_max: false,
        attack: Some((lambda, budget, false)),
    })
}

/// Bid the maximum to win and learn the highest value via the price, then
/// brute-force only to match that value to a bidder.
pub fn overbid_plus_attack(n: usize, lambda: u16, budget: u64) -> Arc<dyn Strategy> {
    Arc::new(AuctionStrategy {
        name: format!("overbid-attack:{budget}"),
        n,
        bid_max: true,
        attack: Some((lambda, budget, true)),
    })
}

/// Always bid `b`, open, honest beliefs (test-grid deviation).
pub fn fixed_bid(n: usize, b: u64) -> Arc<dyn Strategy> {
    struct Fixed {
        name: String,
        n: usize,
        b: u64,
    }
    impl Strategy for Fixed {
        fn name(&self) -> &str {
            &self.name
        }
        fn instantiate(&self, kappa: u32, player: usize) -> Box<dyn PlayerCtrl> {
            Box::new(FixedCtrl {
                n: self.n,
                kappa,
                player,
                b: self.b,
            })
        }
    }
    struct FixedCtrl {
        n: usize,
        kappa: u32,
        player: usize,
        b: u64,
    }
    impl PlayerCtrl for FixedCtrl {
        fn act(&mut self, round: u32, inbox: &[Envelope], _rng: &mut Stream) -> Result<Vec<Message>> {
            let hub = |payload| {
                vec![Message {
                    to: Endpoint::Hub,
                    payload,
                }]
            };
            Ok(match round {
                1 => hub(Payload::Uint(self.b.min(bid_cap(self.kappa)))),
                2 => hub(Payload::Bit(1)),
                3 => {
                    let won = inbox.iter().any(|e| e.payload.as_uint().is_some());
                    let mut x = if won {
                        let mut x = vec![0.0; self.n];
                        x[self.player] = 1.0;
                        x
                    } else {
                        let mut x = vec![1.0 / (self.n as f64 - 1.0); self.n];
                        x[self.player] = 0.0;
                        x
                    };
                    hub(Payload::List(x.drain(..).map(Payload::Real).collect()))
                }
                _ => hub(Payload::Null),
            })
        }
    }
    Arc::new(Fixed {
        name: format!("fixed-bid:{b}"),
        n,
        b,
    })
}
