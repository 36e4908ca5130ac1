//! Monte Carlo second-price auction simulator.
//!
//! This is the ground truth the analytic modules are checked against. It
//! never calls into them: each trial draws a type, the signals, a competing
//! bid and a realized value, applies the strategy's bid, and books the
//! outcome (the advertiser wins ties and pays the competing bid).
//!
//! Trials are split over a fixed number of shards. Shard `s` draws from
//! ChaCha8 seeded with [`shard_seed`]`(seed, s)` and shard summaries are merged
//! in index order, so results depend only on `(trials, seed)` and never on
//! thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{check_range, invalid, Error, Result};

pub type TrialRng = ChaCha8Rng;

/// Shard count used by every simulation in the crate.
pub const SHARDS: u64 = 64;

/// Largest number of item types a [`SimScenario`] may have.
pub const MAX_TYPES: usize = 8;

/// Derives the seed of shard `shard` from `base` with the splitmix64
/// finalizer applied to `base + (shard + 1) * 0x9E3779B97F4A7C15`.
pub fn shard_seed(base: u64, shard: u64) -> u64 {
    let mut z = base.wrapping_add((shard + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Running mean and variance (Welford), mergeable across shards.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Summary {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Summary {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Summary) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    /// Sample variance (`n - 1` denominator).
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Runs `trials` independent trials, each writing `width` statistics into
/// its output slice, and returns one [`Summary`] per statistic.
pub fn run_trials<F>(trials: u64, seed: u64, width: usize, trial: F) -> Vec<Summary>
where
    F: Fn(&mut TrialRng, &mut [f64]) + Sync,
{
    let per = trials / SHARDS;
    let extra = trials % SHARDS;
    let shards: Vec<Vec<Summary>> = (0..SHARDS)
        .into_par_iter()
        .map(|s| {
            let n = per + u64::from(s < extra);
            let mut rng = TrialRng::seed_from_u64(shard_seed(seed, s));
            let mut acc = vec![Summary::default(); width];
            let mut out = vec![0.0; width];
            for _ in 0..n {
                trial(&mut rng, &mut out);
                for (a, x) in acc.iter_mut().zip(&out) {
                    a.push(*x);
                }
            }
            acc
        })
        .collect();
    let mut total = vec![Summary::default(); width];
    for shard in &shards {
        for (t, s) in total.iter_mut().zip(shard) {
            t.merge(s);
        }
    }
    total
}

/// Value of an item of a given type: known exactly or drawn from a law
/// (bidders without the draw use its mean).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TypeValue {
    Fixed(f64),
    Law(Distribution),
}

impl TypeValue {
    fn mean(&self) -> f64 {
        match self {
            TypeValue::Fixed(v) => *v,
            TypeValue::Law(d) => d.mean(),
        }
    }

    fn draw(&self, u: f64) -> f64 {
        match self {
            TypeValue::Fixed(v) => *v,
            TypeValue::Law(d) => d.quantile(u),
        }
    }
}

/// `count` conditionally independent signals, each naming the true type with
/// probability `quality` and otherwise a uniformly chosen other type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalModel {
    pub quality: f64,
    pub count: usize,
}

impl Default for SignalModel {
    fn default() -> Self {
        Self {
            quality: 0.5,
            count: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Strategy {
    /// The same bid on every item.
    NoData { bid: f64 },
    /// Bid the posterior expected value given the signals.
    PosteriorBidding,
    /// Two types only: `bids[k]` is the bid after `k` signals naming type 0.
    FixedBids { bids: Vec<f64> },
    /// Bid the realized value of the item.
    Truthful,
}

/// A single-advertiser world instantiated end to end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimScenario {
    pub type_prior: Vec<f64>,
    pub values_by_type: Vec<TypeValue>,
    pub price_law_by_type: Vec<Distribution>,
    #[serde(default)]
    pub signal: SignalModel,
    pub strategy: Strategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimResult {
    pub mean_utility: f64,
    pub std_error: f64,
    /// Expected spend per item (price on wins, 0 otherwise).
    pub mean_spend: f64,
    pub spend_std_error: f64,
    pub win_rate: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Common-random-number comparison of two strategies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedResult {
    /// Mean of the per-trial utility difference `first - second`.
    pub mean_difference: f64,
    pub std_error: f64,
    pub first: SimResult,
    pub second: SimResult,
}

impl SimScenario {
    pub fn validate(&self) -> Result<()> {
        let k = self.type_prior.len();
        if k == 0 || k > MAX_TYPES {
            return invalid("type_prior", format!("{k} types; need 1..={MAX_TYPES}"));
        }
        if self.values_by_type.len() != k || self.price_law_by_type.len() != k {
            return invalid("scenario", "per-type lists must match the prior length");
        }
        if self.type_prior.iter().any(|p| !p.is_finite() || *p < 0.0)
            || (self.type_prior.iter().sum::<f64>() - 1.0).abs() > 1e-12
        {
            return invalid("type_prior", "must be nonnegative and sum to 1");
        }
        for v in &self.values_by_type {
            if let TypeValue::Fixed(x) = v {
                if !x.is_finite() {
                    return invalid("values_by_type", "values must be finite");
                }
            }
        }
        check_range("signal quality", self.signal.quality, 0.0, 1.0)?;
        match &self.strategy {
            Strategy::NoData { bid } if !bid.is_finite() => {
                return invalid("strategy", "bid must be finite");
            }
            Strategy::FixedBids { bids } => {
                if k != 2 {
                    return invalid("strategy", "fixed bids need exactly two types");
                }
                if bids.len() != self.signal.count + 1 {
                    return invalid(
                        "strategy",
                        format!(
                            "{} signals need {} bids",
                            self.signal.count,
                            self.signal.count + 1
                        ),
                    );
                }
                if bids.iter().any(|b| !b.is_finite()) {
                    return invalid("strategy", "bids must be finite");
                }
            }
            _ => {}
        }
        if let Some(b) = self.budget {
            if !b.is_finite() || b < 0.0 {
                return invalid("budget", "must be finite and nonnegative");
            }
        }
        Ok(())
    }

    fn same_structure(&self, other: &SimScenario) -> Result<()> {
        if self.type_prior != other.type_prior {
            return Err(Error::StructureMismatch("type_prior"));
        }
        if self.values_by_type != other.values_by_type {
            return Err(Error::StructureMismatch("values_by_type"));
        }
        if self.price_law_by_type != other.price_law_by_type {
            return Err(Error::StructureMismatch("price_law_by_type"));
        }
        if self.signal != other.signal {
            return Err(Error::StructureMismatch("signal"));
        }
        Ok(())
    }
}

struct World {
    counts: [u32; MAX_TYPES],
    price: f64,
    value: f64,
}

struct Prepared<'a> {
    sc: &'a SimScenario,
    cum_prior: Vec<f64>,
    means: Vec<f64>,
    /// Two-type posterior bids indexed by the count of type-0 signals.
    binary_bids: Option<Vec<f64>>,
}

impl<'a> Prepared<'a> {
    fn new(sc: &'a SimScenario) -> Self {
        let mut acc = 0.0;
        let cum_prior = sc
            .type_prior
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let means: Vec<f64> = sc.values_by_type.iter().map(TypeValue::mean).collect();
        let mut prep = Self {
            sc,
            cum_prior,
            means,
            binary_bids: None,
        };
        if sc.type_prior.len() == 2 {
            let n = sc.signal.count;
            let bids = (0..=n)
                .map(|k| {
                    let mut counts = [0u32; MAX_TYPES];
                    counts[0] = k as u32;
                    counts[1] = (n - k) as u32;
                    prep.posterior_bid(&counts)
                })
                .collect();
            prep.binary_bids = Some(bids);
        }
        prep
    }

    fn posterior_bid(&self, counts: &[u32; MAX_TYPES]) -> f64 {
        let k = self.sc.type_prior.len();
        let q = self.sc.signal.quality;
        let miss = if k > 1 {
            (1.0 - q) / (k - 1) as f64
        } else {
            0.0
        };
        let n = self.sc.signal.count as i32;
        let weights: Vec<f64> = (0..k)
            .map(|t| {
                let c = counts[t] as i32;
                self.sc.type_prior[t] * q.powi(c) * miss.powi(n - c)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            // Impossible signal pattern; fall back to the prior.
            return self
                .sc
                .type_prior
                .iter()
                .zip(&self.means)
                .map(|(p, m)| p * m)
                .sum();
        }
        weights
            .iter()
            .zip(&self.means)
            .map(|(w, m)| w * m)
            .sum::<f64>()
            / total
    }

    fn draw(&self, rng: &mut TrialRng) -> World {
        let k = self.sc.type_prior.len();
        let u: f64 = rng.random();
        let ty = self.cum_prior.partition_point(|c| *c <= u).min(k - 1);
        let mut counts = [0u32; MAX_TYPES];
        let q = self.sc.signal.quality;
        for _ in 0..self.sc.signal.count {
            let u: f64 = rng.random();
            let reported = if u < q || k == 1 {
                ty
            } else {
                let j = (((u - q) / (1.0 - q)) * (k - 1) as f64) as usize;
                let j = j.min(k - 2);
                if j >= ty {
                    j + 1
                } else {
                    j
                }
            };
            counts[reported] += 1;
        }
        let price = self.sc.price_law_by_type[ty].quantile(rng.random());
        let value = self.sc.values_by_type[ty].draw(rng.random());
        World {
            counts,
            price,
            value,
        }
    }

    fn bid(&self, strategy: &Strategy, w: &World) -> f64 {
        match strategy {
            Strategy::NoData { bid } => *bid,
            Strategy::Truthful => w.value,
            Strategy::FixedBids { bids } => bids[w.counts[0] as usize],
            Strategy::PosteriorBidding => match &self.binary_bids {
                Some(b) => b[w.counts[0] as usize],
                None => self.posterior_bid(&w.counts),
            },
        }
    }
}

/// `(utility, spend, won)` for one bid.
fn outcome(bid: f64, w: &World) -> (f64, f64, f64) {
    if bid >= w.price {
        (w.value - w.price, w.price, 1.0)
    } else {
        (0.0, 0.0, 0.0)
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return invalid("trials", "need at least one trial");
    }
    Ok(())
}

fn result_from(util: &Summary, spend: &Summary, win: &Summary, seed: u64) -> SimResult {
    SimResult {
        mean_utility: util.mean,
        std_error: util.std_error(),
        mean_spend: spend.mean,
        spend_std_error: spend.std_error(),
        win_rate: win.mean,
        trials: util.count,
        seed,
    }
}

fn check_budget(sc: &SimScenario, r: &SimResult) -> Result<()> {
    if let Some(budget) = sc.budget {
        if r.mean_spend > budget + 3.0 * r.spend_std_error + 1e-9 {
            return Err(Error::BudgetInfeasible {
                spend: r.mean_spend,
                budget,
                std_error: r.spend_std_error,
            });
        }
    }
    Ok(())
}

pub fn simulate(sc: &SimScenario, trials: u64, seed: u64) -> Result<SimResult> {
    sc.validate()?;
    check_trials(trials)?;
    let prep = Prepared::new(sc);
    let s = run_trials(trials, seed, 3, |rng, out| {
        let w = prep.draw(rng);
        let (u, sp, win) = outcome(prep.bid(&sc.strategy, &w), &w);
        out[0] = u;
        out[1] = sp;
        out[2] = win;
    });
    let r = result_from(&s[0], &s[1], &s[2], seed);
    check_budget(sc, &r)?;
    Ok(r)
}

/// Simulates both strategies on the same draws and summarizes the per-trial
/// utility difference `a - b`.
pub fn paired_difference(
    a: &SimScenario,
    b: &SimScenario,
    trials: u64,
    seed: u64,
) -> Result<PairedResult> {
    a.validate()?;
    b.validate()?;
    a.same_structure(b)?;
    check_trials(trials)?;
    let prep_a = Prepared::new(a);
    let prep_b = Prepared::new(b);
    let s = run_trials(trials, seed, 7, |rng, out| {
        let w = prep_a.draw(rng);
        let (ua, sa, wa) = outcome(prep_a.bid(&a.strategy, &w), &w);
        let (ub, sb, wb) = outcome(prep_b.bid(&b.strategy, &w), &w);
        out.copy_from_slice(&[ua - ub, ua, sa, wa, ub, sb, wb]);
    });
    let first = result_from(&s[1], &s[2], &s[3], seed);
    let second = result_from(&s[4], &s[5], &s[6], seed);
    check_budget(a, &first)?;
    check_budget(b, &second)?;
    Ok(PairedResult {
        mean_difference: s[0].mean,
        std_error: s[0].std_error(),
        first,
        second,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deterministic_world(bid: f64) -> SimScenario {
        SimScenario {
            type_prior: vec![1.0],
            values_by_type: vec![TypeValue::Fixed(1.0)],
            price_law_by_type: vec![Distribution::point_mass(0.5).unwrap()],
            signal: SignalModel::default(),
            strategy: Strategy::NoData { bid },
            budget: None,
        }
    }

    #[test]
    fn deterministic_world_is_exact() {
        let r = simulate(&deterministic_world(0.6), 100, 3).unwrap();
        assert_eq!(r.mean_utility, 0.5);
        assert_eq!(r.std_error, 0.0);
        assert_eq!(r.win_rate, 1.0);
        assert_eq!(r.mean_spend, 0.5);
        assert_eq!(r.trials, 100);
    }

    #[test]
    fn ties_go_to_the_advertiser() {
        let r = simulate(&deterministic_world(0.5), 10, 3).unwrap();
        assert_eq!(r.win_rate, 1.0);
    }

    #[test]
    fn identical_pair_has_zero_difference() {
        let mut sc = deterministic_world(0.7);
        sc.price_law_by_type = vec![Distribution::uniform(0.0, 1.0).unwrap()];
        let r = paired_difference(&sc, &sc, 10_000, 11).unwrap();
        assert_eq!(r.mean_difference, 0.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn structure_mismatch_is_reported() {
        let a = deterministic_world(0.7);
        let mut b = a.clone();
        b.price_law_by_type = vec![Distribution::point_mass(0.4).unwrap()];
        assert_eq!(
            paired_difference(&a, &b, 10, 1).unwrap_err(),
            Error::StructureMismatch("price_law_by_type")
        );
    }

    #[test]
    fn budget_violation_is_reported() {
        let mut sc = deterministic_world(0.6);
        sc.budget = Some(0.4);
        assert!(matches!(
            simulate(&sc, 100, 1),
            Err(Error::BudgetInfeasible { .. })
        ));
        sc.budget = Some(0.5);
        assert!(simulate(&sc, 100, 1).is_ok());
    }

    #[test]
    fn summary_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut whole = Summary::default();
        xs.iter().for_each(|x| whole.push(*x));
        let mut a = Summary::default();
        let mut b = Summary::default();
        xs[..333].iter().for_each(|x| a.push(*x));
        xs[333..].iter().for_each(|x| b.push(*x));
        a.merge(&b);
        assert_eq!(a.count, whole.count);
        assert!((a.mean - whole.mean).abs() < 1e-12);
        assert!((a.variance() - whole.variance()).abs() < 1e-9);
    }

    #[test]
    fn shard_seeds_differ() {
        let seeds: Vec<u64> = (0..SHARDS).map(|s| shard_seed(42, s)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), seeds.len());
    }

    #[test]
    fn rejects_zero_trials() {
        assert!(simulate(&deterministic_world(0.6), 0, 1).is_err());
    }
}
