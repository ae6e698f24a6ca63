//! Subcommand bodies. Every command resolves names through the registry,
//! runs fully seeded, and emits its reports as JSON lines (or CSV where
//! noted) to --output or stdout. The returned bool is the pass verdict.

use std::path::{Path, PathBuf};

use pseudonash::analysis::{self, DEFAULT_ALPHA};
use pseudonash::dominance::em_dominance_score;
use pseudonash::games::{auction, guessing, ht};
use pseudonash::rng::stream;
use pseudonash::runtime::{
    check_expectation_nash, check_pseudo_nash, play_once, pseudo_nash_pass, ExpectationVerdict,
};
use pseudonash::{DominanceParams, Error, Verdict};
use serde_json::json;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::registry::{
    build_deviation, build_game, build_profile, fast_ht_ensemble, resolve_ensemble, Variant,
};
use crate::{
    AuctionDemoArgs, Cli, CrossValidateArgs, DominanceArgs, GuessingDemoArgs, HtDemoArgs,
    NashArgs, PseudoArgs, SeparationArgs,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format '{other}' (json|csv)")),
        }
    }
}

fn emit(output: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match output {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Run `f` on a fixed-size worker pool when requested; the seed-splitting
/// contract makes the result identical either way.
fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("worker pool")
            .install(f),
        None => f(),
    }
}

fn make_params(
    kappa: u32,
    c: u32,
    c_hat: Option<u32>,
    trials: u32,
    m: Option<u64>,
    seed: u64,
) -> Result<DominanceParams, Error> {
    let mut params = match c_hat {
        Some(ch) => DominanceParams::new(kappa, c, ch, trials, seed)?,
        None => DominanceParams::with_default_c_hat(kappa, c, trials, seed)?,
    };
    if let Some(m) = m {
        params = params.with_m(m);
    }
    Ok(params)
}

pub fn run_dominance(args: DominanceArgs) -> Result<bool, Error> {
    let x = resolve_ensemble(&args.x)?;
    let y = resolve_ensemble(&args.y)?;
    let seed = args.common.seed();
    with_pool(args.common.workers, || {
        let mut lines = String::new();
        let mut pass = true;
        for &kappa in &args.kappa {
            let params = make_params(kappa, args.c, args.c_hat, args.trials, args.m, seed)?;
            let report = em_dominance_score(&x, &y, &params)?;
            pass &= report.verdict == Verdict::Dominates;
            lines.push_str(&serde_json::to_string(&report).expect("report serializes"));
            lines.push('\n');
        }
        emit(&args.common.output, &lines)?;
        Ok(pass)
    })
}

pub fn run_pseudo(args: PseudoArgs) -> Result<bool, Error> {
    let seed = args.common.seed();
    let params = make_params(args.kappa, args.c, args.c_hat, args.trials, args.m, seed)?;
    with_pool(args.common.workers, || {
        let mut lines = String::new();
        let pass;
        if args.fast {
            if args.game != "ht" {
                return Err(Error::Config("--fast applies to the ht game only".into()));
            }
            let profile = fast_ht_ensemble(&args.profile)?;
            let mut all_dominate = true;
            for name in &args.deviations {
                let deviation = fast_ht_ensemble(name)?;
                let report = em_dominance_score(&profile, &deviation, &params)?;
                all_dominate &= report.verdict == Verdict::Dominates;
                let mut value = serde_json::to_value(&report).expect("report serializes");
                let obj = value.as_object_mut().expect("report is an object");
                obj.insert("player".into(), json!(0));
                obj.insert("deviation".into(), json!(name));
                lines.push_str(&value.to_string());
                lines.push('\n');
            }
            pass = all_dominate;
        } else {
            let game = build_game(&args.game, args.variant, args.lambda)?;
            let profile = build_profile(&args.game, &args.profile)?;
            let deviations = args
                .deviations
                .iter()
                .map(|n| build_deviation(&args.game, n, args.lambda))
                .collect::<Result<Vec<_>, _>>()?;
            let reports = check_pseudo_nash(&game, &profile, &deviations, &params)?;
            pass = pseudo_nash_pass(&reports);
            for report in &reports {
                lines.push_str(&serde_json::to_string(report).expect("report serializes"));
                lines.push('\n');
            }
        }
        emit(&args.common.output, &lines)?;
        Ok(pass)
    })
}

pub fn run_nash(args: NashArgs) -> Result<bool, Error> {
    let seed = args.common.seed();
    let game = build_game(&args.game, args.variant, args.lambda)?;
    let profile = build_profile(&args.game, &args.profile)?;
    let deviations = args
        .deviations
        .iter()
        .map(|n| build_deviation(&args.game, n, args.lambda))
        .collect::<Result<Vec<_>, _>>()?;
    with_pool(args.common.workers, || {
        let reports = check_expectation_nash(
            &game,
            &profile,
            &deviations,
            args.kappa,
            args.sample_count,
            args.epsilon,
            seed,
        )?;
        let mut lines = String::new();
        for report in &reports {
            lines.push_str(&serde_json::to_string(report).expect("report serializes"));
            lines.push('\n');
        }
        emit(&args.common.output, &lines)?;
        Ok(reports.iter().all(|r| r.verdict == ExpectationVerdict::Pass))
    })
}

pub fn run_guessing_demo(args: GuessingDemoArgs) -> Result<bool, Error> {
    let game = build_game("guessing", args.variant, args.lambda)?;
    let guesser = match args.budget {
        Some(budget) => guessing::brute_force_guesser(args.lambda, budget)?,
        None => guessing::uniform_guesser(),
    };
    let profile = vec![guessing::uniform_committer(), guesser];
    let seed = args.common.seed();
    let mut lines = String::new();
    let mut total = 0.0;
    for i in 0..args.plays {
        let t = play_once(&game, &profile, args.kappa, seed.wrapping_add(i as u64))?;
        total += t.utilities[1];
        lines.push_str(&t.to_json_line());
        lines.push('\n');
    }
    let summary = json!({
        "game": "guessing",
        "kappa": args.kappa,
        "plays": args.plays,
        "meanGuesserUtility": total / args.plays as f64,
    });
    lines.push_str(&summary.to_string());
    lines.push('\n');
    emit(&args.common.output, &lines)?;
    Ok(true)
}

pub fn run_ht_demo(args: HtDemoArgs) -> Result<bool, Error> {
    let kappa = args.kappa;
    let game = ht::make_ht_game(ht::HtConfig::standard())?.with_max_rounds(|_| 100_000);
    let profile = vec![ht::s_star(DEFAULT_ALPHA); 3];
    let seed = args.common.seed();
    let mut stopped = 0u32;
    for i in 0..args.plays {
        let t = play_once(&game, &profile, kappa, seed.wrapping_add(i as u64))?;
        if ht::outcome_end_round(&t) <= 4 * kappa {
            stopped += 1;
        }
    }
    let empirical = stopped as f64 / args.plays as f64;
    let closed = analysis::ht_stop_within(kappa, DEFAULT_ALPHA)?;
    let sigma = (closed * (1.0 - closed) / args.plays as f64).sqrt();
    let tolerance = f64::max(0.02, 3.0 * sigma);
    let pass = (empirical - closed).abs() <= tolerance;
    let summary = json!({
        "game": "ht",
        "kappa": kappa,
        "plays": args.plays,
        "empiricalStopProb": empirical,
        "closedFormStopProb": closed,
        "tolerance": tolerance,
        "pass": pass,
    });
    emit(&args.common.output, &format!("{summary}\n"))?;
    Ok(pass)
}

pub fn run_auction_demo(args: AuctionDemoArgs) -> Result<bool, Error> {
    let game = build_game("auction", args.variant, args.lambda)?;
    let mut profile = build_profile("auction", "truthful")?;
    let attacker = 1usize;
    if args.variant == Variant::Hash {
        profile[attacker] = auction::truthful_plus_attack(4, args.lambda, args.budget);
    }
    let seed = args.common.seed();
    let n = profile.len();
    let mut losses = vec![0u32; n];
    let mut loser_rewards = vec![0u32; n];
    for i in 0..args.plays {
        let t = play_once(&game, &profile, args.kappa, seed.wrapping_add(i as u64))?;
        let (winner, _) = auction::outcome_winner_price(&t);
        let rewards = auction::outcome_rewards(&t);
        for p in 0..n {
            if Some(p) != winner {
                losses[p] += 1;
                loser_rewards[p] += rewards[p] as u32;
            }
        }
    }
    let rates: Vec<f64> = (0..n)
        .map(|p| {
            if losses[p] == 0 {
                0.0
            } else {
                loser_rewards[p] as f64 / losses[p] as f64
            }
        })
        .collect();
    let summary = json!({
        "game": "auction",
        "kappa": args.kappa,
        "plays": args.plays,
        "attacker": attacker,
        "loserRewardRates": rates,
    });
    emit(&args.common.output, &format!("{summary}\n"))?;
    Ok(true)
}

pub fn run_separation(args: SeparationArgs) -> Result<bool, Error> {
    let seed = args.common.seed();
    let rows = analysis::separation_table(&args.kappa);
    // Monte-Carlo gap estimates from the iteration-level samplers; the
    // deviation gaps mirror the eps_gap and cne_gap closed forms
    let mc = args.mc_plays.map(|plays| {
        args.kappa
            .iter()
            .map(|&kappa| {
                let arm_mean = |tag: u64, f: &dyn Fn(&mut pseudonash::rng::Stream) -> f64| {
                    let mut rng = stream(seed, &[kappa as u64, tag]);
                    let mut sum = 0.0;
                    let mut sum_sq = 0.0;
                    for _ in 0..plays {
                        let v = f(&mut rng);
                        sum += v;
                        sum_sq += v * v;
                    }
                    let mean = sum / plays as f64;
                    let var = (sum_sq / plays as f64 - mean * mean).max(0.0);
                    (mean, (var / plays as f64).sqrt())
                };
                let (hat, hat_se) =
                    arm_mean(0, &|rng| ht::fast_sample_s_hat(kappa, DEFAULT_ALPHA, rng));
                let (ext, ext_se) =
                    arm_mean(2, &|rng| ht::fast_sample_extend(kappa, DEFAULT_ALPHA, rng));
                // the unbounded profile always reconstructs, so its mean
                // is exactly 2^κ with zero variance
                let star = 2f64.powi(kappa as i32);
                let cne_se = (hat_se * hat_se + ext_se * ext_se).sqrt();
                (star - hat, hat_se, ext - hat, cne_se)
            })
            .collect::<Vec<_>>()
    });
    let content = match args.format {
        Format::Json => {
            let mut out = String::new();
            for (i, row) in rows.iter().enumerate() {
                let mut value = serde_json::to_value(row).expect("row serializes");
                if let Some(mc) = &mc {
                    let obj = value.as_object_mut().expect("row is an object");
                    obj.insert("mcEpsGap".into(), json!(mc[i].0));
                    obj.insert("mcEpsGapStderr".into(), json!(mc[i].1));
                    obj.insert("mcCneGap".into(), json!(mc[i].2));
                    obj.insert("mcCneGapStderr".into(), json!(mc[i].3));
                }
                out.push_str(&value.to_string());
                out.push('\n');
            }
            out
        }
        Format::Csv => {
            let mut out = String::from("kappa,stop_prob,eps_gap,cne_gap,pseudo_bound_m100");
            if mc.is_some() {
                out.push_str(",mc_eps_gap,mc_eps_gap_stderr,mc_cne_gap,mc_cne_gap_stderr");
            }
            out.push('\n');
            for (i, row) in rows.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{}",
                    row.kappa, row.stop_prob, row.eps_gap, row.cne_gap, row.pseudo_bound_m100
                ));
                if let Some(mc) = &mc {
                    out.push_str(&format!(",{},{},{},{}", mc[i].0, mc[i].1, mc[i].2, mc[i].3));
                }
                out.push('\n');
            }
            out
        }
    };
    emit(&args.common.output, &content)?;
    Ok(true)
}

pub fn run_cross_validate(args: CrossValidateArgs) -> Result<bool, Error> {
    let kappa = args.kappa;
    let seed = args.common.seed();
    let game = ht::make_ht_game(ht::HtConfig::standard())?.with_max_rounds(|_| 100_000);
    let profile = vec![ht::s_star(DEFAULT_ALPHA); 3];

    // stop iteration j of a reconstruction at round 4j+3
    const BINS: usize = 21;
    let mut round_level = [0u64; BINS];
    for i in 0..args.plays {
        let t = play_once(&game, &profile, kappa, seed.wrapping_add(i as u64))?;
        let end = ht::outcome_end_round(&t);
        let j = ((end - 3) / 4) as usize;
        round_level[j.min(BINS - 1)] += 1;
    }
    let mut fast = [0u64; BINS];
    let mut rng = stream(seed, &[77]);
    for _ in 0..args.plays {
        let j = ht::fast_sample_stop_iteration(DEFAULT_ALPHA, &mut rng) as usize;
        fast[j.min(BINS - 1)] += 1;
    }

    // equal-size two-sample chi-square over the occupied bins
    let mut statistic = 0.0;
    let mut dof = 0usize;
    for b in 0..BINS {
        let (o1, o2) = (round_level[b] as f64, fast[b] as f64);
        if o1 + o2 > 0.0 {
            statistic += (o1 - o2) * (o1 - o2) / (o1 + o2);
            dof += 1;
        }
    }
    let dof = dof.saturating_sub(1).max(1);
    let critical = ChiSquared::new(dof as f64)
        .expect("valid dof")
        .inverse_cdf(0.999);
    let pass = statistic <= critical;
    let summary = json!({
        "kappa": kappa,
        "plays": args.plays,
        "statistic": statistic,
        "dof": dof,
        "critical999": critical,
        "pass": pass,
    });
    emit(&args.common.output, &format!("{summary}\n"))?;
    Ok(pass)
}

/// One JSON document per run: either {"argv": [...]} verbatim, or a flat
/// object mirroring the flags ({"subcommand": "dominance", "kappa": [20],
/// "x": "example35-x", ...}).
pub fn parse_config(path: &Path) -> Result<Cli, Error> {
    use clap::Parser;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let doc: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("bad JSON in {}: {e}", path.display())))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::Config("config must be a JSON object".into()))?;

    let mut argv: Vec<String> = vec!["pseudonash".into()];
    if let Some(list) = obj.get("argv") {
        let list = list
            .as_array()
            .ok_or_else(|| Error::Config("argv must be an array of strings".into()))?;
        for item in list {
            argv.push(
                item.as_str()
                    .ok_or_else(|| Error::Config("argv must be an array of strings".into()))?
                    .to_string(),
            );
        }
    } else {
        let sub = obj
            .get("subcommand")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::Config("config needs \"subcommand\" or \"argv\"".into()))?;
        argv.push(sub.to_string());
        for (key, value) in obj {
            if key == "subcommand" {
                continue;
            }
            let flag = format!(
                "--{}",
                key.chars()
                    .flat_map(|ch| {
                        if ch.is_ascii_uppercase() {
                            vec!['-', ch.to_ascii_lowercase()]
                        } else {
                            vec![ch]
                        }
                    })
                    .collect::<String>()
            );
            match value {
                serde_json::Value::Bool(true) => argv.push(flag),
                serde_json::Value::Bool(false) => {}
                serde_json::Value::Array(items) => {
                    argv.push(flag);
                    argv.push(
                        items
                            .iter()
                            .map(|v| scalar_to_arg(v))
                            .collect::<Result<Vec<_>, _>>()?
                            .join(","),
                    );
                }
                other => {
                    argv.push(flag);
                    argv.push(scalar_to_arg(other)?);
                }
            }
        }
    }
    Cli::try_parse_from(&argv).map_err(|e| Error::Config(e.to_string()))
}

fn scalar_to_arg(value: &serde_json::Value) -> Result<String, Error> {
    match value {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        other => Err(Error::Config(format!("unsupported config value {other}"))),
    }
}
