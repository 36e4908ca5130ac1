//! Several advertisers in one second-price auction, each deciding whether
//! to acquire data about its own value.
//!
//! Bidders always bid their current estimate of their value (the posterior
//! mean), which is optimal in a second-price auction with independent
//! values. Ties go to the lowest-indexed bidder.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::dist::{Distribution, Interval};
use crate::error::{check_range, invalid, Error, Result};
use crate::mc::{run_trials, shard_seed, Summary};

/// Largest number of bidders in a symmetric game.
pub const MAX_PLAYERS: usize = 64;

/// A comparison is resolved when the estimate is more than this many
/// standard errors from zero.
pub const RESOLUTION_SE: f64 = 3.0;

fn resolved(estimate: f64, std_error: f64) -> bool {
    std_error == 0.0 || estimate.abs() > RESOLUTION_SE * std_error
}

fn inconclusive(test: String, s: &Summary) -> Error {
    Error::InconclusiveAtResolution {
        test,
        estimate: s.mean,
        std_error: s.std_error(),
    }
}

// ---------------------------------------------------------------------------
// Two buyers

/// Two bidders with independent private values. Bidder 1 has the larger
/// mean; inputs are swapped on construction if needed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoBuyerSpec {
    pub value_law_1: Distribution,
    pub value_law_2: Distribution,
}

impl TwoBuyerSpec {
    pub fn new(value_law_1: Distribution, value_law_2: Distribution) -> Self {
        if value_law_1.mean() >= value_law_2.mean() {
            Self {
                value_law_1,
                value_law_2,
            }
        } else {
            Self {
                value_law_1: value_law_2,
                value_law_2: value_law_1,
            }
        }
    }

    /// Swaps the laws if bidder 1 does not have the larger mean.
    pub fn normalized(self) -> Self {
        Self::new(self.value_law_1, self.value_law_2)
    }
}

/// Expected utilities `u[i][d1][d2]` of bidder `i + 1` when bidder 1 has
/// data iff `d1 == 1` and bidder 2 has data iff `d2 == 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PayoffTable {
    pub u: [[[f64; 2]; 2]; 2],
}

impl PayoffTable {
    pub fn get(&self, player: usize, d1: bool, d2: bool) -> f64 {
        self.u[player - 1][usize::from(d1)][usize::from(d2)]
    }

    /// Gains from the other bidder having data, in the order
    /// `u2(1,0)-u2(0,0)`, `u1(0,1)-u1(0,0)`, `u1(1,1)-u1(1,0)`, `u2(1,1)-u2(0,1)`.
    pub fn other_access_gains(&self) -> [f64; 4] {
        [
            self.get(2, true, false) - self.get(2, false, false),
            self.get(1, false, true) - self.get(1, false, false),
            self.get(1, true, true) - self.get(1, true, false),
            self.get(2, true, true) - self.get(2, false, true),
        ]
    }
}

/// `E[(X - y)^+]` for `X ~ law`.
fn excess_over(law: &Distribution, y: f64) -> f64 {
    law.linear(Interval::between(y, f64::INFINITY), -y, 1.0)
}

/// `E[(X - Y)^+]` for independent `X ~ x`, `Y ~ y`.
fn expected_excess(x: &Distribution, y: &Distribution) -> Result<f64> {
    let mut splits = x.breakpoints();
    splits.extend(x.atoms().iter().map(|a| a.0));
    y.expect_over_split(Interval::whole(), |t| excess_over(x, t), &splits)
}

pub fn two_buyer_payoffs(spec: &TwoBuyerSpec) -> Result<PayoffTable> {
    let (f1, f2) = (&spec.value_law_1, &spec.value_law_2);
    let (m1, m2) = (f1.mean(), f2.mean());
    let mut u = [[[0.0; 2]; 2]; 2];
    // Neither informed: bidder 1 always wins at price m2.
    u[0][0][0] = m1 - m2;
    u[1][0][0] = 0.0;
    // Only bidder 2 informed.
    u[0][0][1] = f2.linear(Interval::up_to(m1), m1, -1.0);
    u[1][0][1] = excess_over(f2, m1);
    // Only bidder 1 informed; bidder 2 wins when v1 < m2.
    u[0][1][0] = excess_over(f1, m2);
    u[1][1][0] = f1.linear(Interval::up_to(m2), m2, -1.0);
    // Both informed.
    u[0][1][1] = expected_excess(f1, f2)?;
    u[1][1][1] = expected_excess(f2, f1)?;
    Ok(PayoffTable { u })
}

/// Monte Carlo estimate of the payoff table (ties to bidder 1).
pub fn two_buyer_payoffs_mc(
    spec: &TwoBuyerSpec,
    trials: u64,
    seed: u64,
) -> Result<[[[Summary; 2]; 2]; 2]> {
    if trials == 0 {
        return invalid("trials", "need at least one trial");
    }
    let (f1, f2) = (&spec.value_law_1, &spec.value_law_2);
    let (m1, m2) = (f1.mean(), f2.mean());
    let s = run_trials(trials, seed, 8, |rng, out| {
        let v1 = f1.sample(rng);
        let v2 = f2.sample(rng);
        for d1 in 0..2 {
            for d2 in 0..2 {
                let b1 = if d1 == 1 { v1 } else { m1 };
                let b2 = if d2 == 1 { v2 } else { m2 };
                let (p1, p2) = if b1 >= b2 {
                    (v1 - b2, 0.0)
                } else {
                    (0.0, v2 - b1)
                };
                out[d1 * 2 + d2] = p1;
                out[4 + d1 * 2 + d2] = p2;
            }
        }
    });
    let mut t = [[[Summary::default(); 2]; 2]; 2];
    for (i, row) in t.iter_mut().enumerate() {
        for (d1, cell) in row.iter_mut().enumerate() {
            for (d2, slot) in cell.iter_mut().enumerate() {
                *slot = s[i * 4 + d1 * 2 + d2];
            }
        }
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// Discrete two-bidder examples

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Player {
    One,
    Two,
}

/// Expected payoff of bid `b` with value `v` against a discrete bid law,
/// the bidder winning ties.
fn discrete_payoff(b: f64, v: f64, other: &[(f64, f64)]) -> f64 {
    other
        .iter()
        .filter(|(x, _)| b >= *x)
        .map(|(x, p)| p * (v - x))
        .sum()
}

/// Best payoff over candidate bids (the other bidder's possible bids and `v`).
fn best_payoff(v: f64, other: &[(f64, f64)]) -> f64 {
    other
        .iter()
        .map(|(x, _)| *x)
        .chain([v, f64::NEG_INFINITY])
        .map(|b| discrete_payoff(b, v, other))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Value to `holder` of learning its own value, by enumeration over the
/// joint realizations. The other bidder bids its value if it has data and
/// its mean otherwise.
pub fn discrete_value_of_data(
    values_1: &[(f64, f64)],
    values_2: &[(f64, f64)],
    holder: Player,
    other_has_data: bool,
) -> Result<f64> {
    let d1 = Distribution::discrete(values_1.to_vec())?;
    let d2 = Distribution::discrete(values_2.to_vec())?;
    let (own, other) = match holder {
        Player::One => (d1, d2),
        Player::Two => (d2, d1),
    };
    let other_bids: Vec<(f64, f64)> = if other_has_data {
        other.atoms()
    } else {
        vec![(other.mean(), 1.0)]
    };
    let with: f64 = own
        .atoms()
        .iter()
        .map(|(v, p)| p * best_payoff(*v, &other_bids))
        .sum();
    let without = best_payoff(own.mean(), &other_bids);
    Ok(with - without)
}

// ---------------------------------------------------------------------------
// The three-advertiser purchase game without a pure equilibrium

/// Payoffs in one strategy profile of the purchase game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileCell {
    pub alice_buys: bool,
    pub bella_buys: bool,
    pub alice_payoff: f64,
    pub alice_std_error: f64,
    pub bella_payoff: f64,
    pub bella_std_error: f64,
}

/// Gain to `player` from buying rather than not, given the other's action.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestResponse {
    pub player: String,
    pub other_buys: bool,
    pub gain_from_buying: f64,
    pub std_error: f64,
    pub buys: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleReport {
    pub cells: Vec<ProfileCell>,
    pub responses: Vec<BestResponse>,
    /// Profiles `(alice_buys, bella_buys)` where both best-respond.
    pub equilibria: Vec<(bool, bool)>,
}

impl CycleReport {
    pub fn has_cycle(&self) -> bool {
        self.equilibria.is_empty()
    }
}

/// Probability that the third advertiser's value is 0.
const CANDICE_ZERO: f64 = 0.1;
/// Third advertiser's premium over the first when her value is positive.
const CANDICE_PREMIUM: f64 = 5.0;

/// Utility of the winner among bids `b` with values `v` (ties to the lowest
/// index); returns per-bidder utilities.
fn auction3(b: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    let mut w = 0;
    for i in 1..3 {
        if b[i] > b[w] {
            w = i;
        }
    }
    let price = (0..3)
        .filter(|&i| i != w)
        .map(|i| b[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let mut u = [0.0; 3];
    u[w] = v[w] - price;
    u
}

/// Simulates all four purchase profiles of Alice and Bella on common draws.
///
/// Bella's value is exponential with mean 1 and Alice's is twice that.
/// Candice always knows her value, which is 0 with probability 1/10 and
/// Alice's value plus 5 otherwise. Without data Bella bids 0 and Alice bids
/// her mean, except on a `known_fraction` of items where she knows her value.
pub fn no_pure_eq_cycle(
    data_cost: f64,
    known_fraction: f64,
    trials: u64,
    seed: u64,
) -> Result<CycleReport> {
    if !data_cost.is_finite() || data_cost < 0.0 {
        return invalid("data_cost", "must be finite and nonnegative");
    }
    check_range("known_fraction", known_fraction, 0.0, 1.0)?;
    if trials == 0 {
        return invalid("trials", "need at least one trial");
    }
    let bella_law = Distribution::exponential(1.0)?;
    let alice_mean = 2.0 * bella_law.mean();
    let s = run_trials(trials, seed, 12, |rng, out| {
        let v2 = bella_law.quantile(rng.random());
        let v1 = 2.0 * v2;
        let v3 = if rng.random::<f64>() < CANDICE_ZERO {
            0.0
        } else {
            v1 + CANDICE_PREMIUM
        };
        let alice_knows = rng.random::<f64>() < known_fraction;
        let vals = [v1, v2, v3];
        let mut pay = [[[0.0; 2]; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let b1 = if a == 1 || alice_knows {
                    v1
                } else {
                    alice_mean
                };
                let b2 = if b == 1 { v2 } else { 0.0 };
                let u = auction3([b1, b2, v3], vals);
                pay[0][a][b] = u[0] - if a == 1 { data_cost } else { 0.0 };
                pay[1][a][b] = u[1] - if b == 1 { data_cost } else { 0.0 };
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                out[a * 2 + b] = pay[0][a][b];
                out[4 + a * 2 + b] = pay[1][a][b];
            }
        }
        // Alice's gain from buying given Bella's action, then Bella's.
        out[8] = pay[0][1][0] - pay[0][0][0];
        out[9] = pay[0][1][1] - pay[0][0][1];
        out[10] = pay[1][0][1] - pay[1][0][0];
        out[11] = pay[1][1][1] - pay[1][1][0];
    });
    let mut cells = Vec::with_capacity(4);
    for a in 0..2 {
        for b in 0..2 {
            let (sa, sb) = (&s[a * 2 + b], &s[4 + a * 2 + b]);
            cells.push(ProfileCell {
                alice_buys: a == 1,
                bella_buys: b == 1,
                alice_payoff: sa.mean,
                alice_std_error: sa.std_error(),
                bella_payoff: sb.mean,
                bella_std_error: sb.std_error(),
            });
        }
    }
    let specs = [
        ("alice", false, 8),
        ("alice", true, 9),
        ("bella", false, 10),
        ("bella", true, 11),
    ];
    let mut responses = Vec::with_capacity(4);
    for (player, other_buys, idx) in specs {
        let g = &s[idx];
        if !resolved(g.mean, g.std_error()) {
            return Err(inconclusive(
                format!("{player} best response when the other buys = {other_buys}"),
                g,
            ));
        }
        responses.push(BestResponse {
            player: player.to_string(),
            other_buys,
            gain_from_buying: g.mean,
            std_error: g.std_error(),
            buys: g.mean > 0.0,
        });
    }
    let alice_br = |bella: bool| responses[usize::from(bella)].buys;
    let bella_br = |alice: bool| responses[2 + usize::from(alice)].buys;
    let equilibria = [(false, false), (false, true), (true, false), (true, true)]
        .into_iter()
        .filter(|&(a, b)| alice_br(b) == a && bella_br(a) == b)
        .collect();
    Ok(CycleReport {
        cells,
        responses,
        equilibria,
    })
}

// ---------------------------------------------------------------------------
// Symmetric purchase game

/// `n` bidders whose value estimates are independent draws from
/// `with_data_law` if they buy the data at `cost` and from
/// `without_data_law` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetricGameSpec {
    pub n: usize,
    pub with_data_law: Distribution,
    pub without_data_law: Distribution,
    pub cost: f64,
}

impl SymmetricGameSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n > MAX_PLAYERS {
            return invalid(
                "n",
                format!("need 2..={MAX_PLAYERS} players, got {}", self.n),
            );
        }
        if !self.cost.is_finite() || self.cost < 0.0 {
            return invalid("cost", "must be finite and nonnegative");
        }
        Ok(())
    }
}

/// Net gain from buying when `others_buying` of the other bidders buy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PurchaseGain {
    pub others_buying: usize,
    pub gain: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub gains: Vec<PurchaseGain>,
    /// Numbers of purchasers that form pure equilibria.
    pub equilibria: Vec<usize>,
}

/// Per-trial buy-minus-not gains for every count of other purchasers,
/// on common draws.
pub fn purchase_gains(spec: &SymmetricGameSpec, trials: u64, seed: u64) -> Result<Vec<Summary>> {
    spec.validate()?;
    if trials == 0 {
        return invalid("trials", "need at least one trial");
    }
    let n = spec.n;
    let (h, g) = (&spec.with_data_law, &spec.without_data_law);
    let cost = spec.cost;
    Ok(run_trials(trials, seed, n, |rng, out| {
        let u0: f64 = rng.random();
        let (xh, xg) = (h.quantile(u0), g.quantile(u0));
        let mut hs = [0.0; MAX_PLAYERS];
        let mut gs = [0.0; MAX_PLAYERS];
        for i in 0..n - 1 {
            let u: f64 = rng.random();
            hs[i] = h.quantile(u);
            gs[i] = g.quantile(u);
        }
        // prefix max over purchasers, suffix max over non-purchasers
        let mut suffix = [f64::NEG_INFINITY; MAX_PLAYERS + 1];
        for i in (0..n - 1).rev() {
            suffix[i] = suffix[i + 1].max(gs[i]);
        }
        let mut prefix = f64::NEG_INFINITY;
        for (j, slot) in out.iter_mut().enumerate() {
            let top = prefix.max(suffix[j]);
            let surplus = |x: f64| if x >= top { x - top } else { 0.0 };
            *slot = surplus(xh) - surplus(xg) - cost;
            if j < n - 1 {
                prefix = prefix.max(hs[j]);
            }
        }
    }))
}

pub fn find_symmetric_purchase_equilibria(
    spec: &SymmetricGameSpec,
    trials: u64,
    seed: u64,
) -> Result<EquilibriumReport> {
    let s = purchase_gains(spec, trials, seed)?;
    for (j, d) in s.iter().enumerate() {
        if !resolved(d.mean, d.std_error()) {
            return Err(inconclusive(
                format!("purchase gain with {j} other buyers"),
                d,
            ));
        }
    }
    let n = spec.n;
    let equilibria = (0..=n)
        .filter(|&k| (k == 0 || s[k - 1].mean >= 0.0) && (k == n || s[k].mean <= 0.0))
        .collect();
    let gains = s
        .iter()
        .enumerate()
        .map(|(j, d)| PurchaseGain {
            others_buying: j,
            gain: d.mean,
            std_error: d.std_error(),
        })
        .collect();
    Ok(EquilibriumReport { gains, equilibria })
}

// ---------------------------------------------------------------------------
// Refinement signals given to every bidder

/// Every bidder's estimate is refined by a mean-zero perturbation when it
/// lies within `delta` of `v_star`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRefinementSpec", into = "RawRefinementSpec")]
pub struct RefinementSpec {
    n: usize,
    value_law: Distribution,
    v_star: f64,
    delta: f64,
    epsilon_law: Distribution,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRefinementSpec {
    n: usize,
    value_law: Distribution,
    v_star: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon_law: Option<Distribution>,
}

impl TryFrom<RawRefinementSpec> for RefinementSpec {
    type Error = Error;

    fn try_from(r: RawRefinementSpec) -> Result<Self> {
        match (r.delta, r.epsilon_law) {
            (None, None) => Self::with_defaults(r.n, r.value_law, r.v_star),
            (Some(d), Some(e)) => Self::new(r.n, r.value_law, r.v_star, d, e),
            (Some(d), None) => Self::new(r.n, r.value_law, r.v_star, d, default_epsilon(d)?),
            (None, Some(_)) => invalid("delta", "required when epsilon_law is given"),
        }
    }
}

impl From<RefinementSpec> for RawRefinementSpec {
    fn from(s: RefinementSpec) -> Self {
        Self {
            n: s.n,
            value_law: s.value_law,
            v_star: s.v_star,
            delta: Some(s.delta),
            epsilon_law: Some(s.epsilon_law),
        }
    }
}

fn default_epsilon(delta: f64) -> Result<Distribution> {
    Distribution::uniform(-delta / 4.0, delta / 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WelfareEstimate {
    pub v_star: f64,
    pub likelihood_ratio: f64,
    pub welfare_effect: f64,
    pub std_error: f64,
}

impl RefinementSpec {
    pub fn new(
        n: usize,
        value_law: Distribution,
        v_star: f64,
        delta: f64,
        epsilon_law: Distribution,
    ) -> Result<Self> {
        if !(3..=MAX_PLAYERS).contains(&n) {
            return invalid("n", format!("need 3..={MAX_PLAYERS} bidders, got {n}"));
        }
        let (lo, hi) = value_law.effective_support();
        if !(v_star > lo && v_star < hi) {
            return invalid(
                "v_star",
                format!("{v_star} is not inside the support ({lo}, {hi})"),
            );
        }
        if !delta.is_finite() || delta <= 0.0 {
            return invalid("delta", "must be positive");
        }
        if epsilon_law.mean().abs() > 1e-9 {
            return invalid("epsilon_law", "must have mean zero");
        }
        let (el, eh) = epsilon_law.support();
        if eh - el >= delta {
            return invalid("epsilon_law", "support must be narrower than delta");
        }
        let window = value_law.mass(Interval::between(v_star - delta, v_star + delta));
        if window <= 0.0 {
            return invalid("v_star", "the refinement window has no mass");
        }
        Ok(Self {
            n,
            value_law,
            v_star,
            delta,
            epsilon_law,
        })
    }

    /// `delta` at 2% of the effective support width and uniform noise on
    /// `[-delta/4, delta/4]`.
    pub fn with_defaults(n: usize, value_law: Distribution, v_star: f64) -> Result<Self> {
        let (lo, hi) = value_law.effective_support();
        let delta = 0.02 * (hi - lo);
        Self::new(n, value_law, v_star, delta, default_epsilon(delta)?)
    }

    /// Same spec at another signal location; a default-sized noise law is
    /// kept as is.
    pub fn at(&self, v_star: f64) -> Result<Self> {
        Self::new(
            self.n,
            self.value_law.clone(),
            v_star,
            self.delta,
            self.epsilon_law.clone(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn v_star(&self) -> f64 {
        self.v_star
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn value_law(&self) -> &Distribution {
        &self.value_law
    }

    pub fn epsilon_law(&self) -> &Distribution {
        &self.epsilon_law
    }
}

/// `F(v*) / ((n - 2)(1 - F(v*)))`: how much more likely the two highest
/// estimates are to both sit at `v*` than the second and third highest.
pub fn likelihood_ratio(spec: &RefinementSpec) -> f64 {
    let f = spec.value_law.cdf(spec.v_star);
    if f >= 1.0 {
        return f64::INFINITY;
    }
    f / ((spec.n - 2) as f64 * (1.0 - f))
}

fn ln_factorial(k: usize) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

/// Monte Carlo estimate of the change in the winner's payoff when every
/// bidder's estimate is refined, conditional on at least two of the three
/// highest estimates falling in the refinement window.
///
/// Draws are exact: the count of estimates in the window and above it is
/// drawn from its conditional multinomial law, then each estimate is drawn
/// from the value law restricted to its region.
pub fn refinement_welfare(
    spec: &RefinementSpec,
    trials: u64,
    seed: u64,
) -> Result<WelfareEstimate> {
    if trials == 0 {
        return invalid("trials", "need at least one trial");
    }
    let f = &spec.value_law;
    let (wlo, whi) = (spec.v_star - spec.delta, spec.v_star + spec.delta);
    let (c_lo, c_hi) = (f.cdf(wlo), f.cdf(whi));
    let p_in = c_hi - c_lo;
    let p_above = 1.0 - c_hi;
    let p_below = c_lo;
    let n = spec.n;
    // (in-window, above-window) counts for which two of the top three
    // estimates are in the window.
    let mut cases = Vec::new();
    for above in 0..=1usize {
        for inside in 2..=(n - above) {
            let below = n - inside - above;
            let lw =
                ln_factorial(n) - ln_factorial(inside) - ln_factorial(above) - ln_factorial(below)
                    + inside as f64 * p_in.ln()
                    + if above > 0 {
                        above as f64 * p_above.ln()
                    } else {
                        0.0
                    }
                    + if below > 0 {
                        below as f64 * p_below.ln()
                    } else {
                        0.0
                    };
            if lw.is_finite() {
                cases.push((inside, above, below, lw));
            }
        }
    }
    if cases.is_empty() {
        return invalid("v_star", "the conditioning event has probability zero");
    }
    let top = cases.iter().map(|c| c.3).fold(f64::NEG_INFINITY, f64::max);
    let mut cum = Vec::with_capacity(cases.len());
    let mut acc = 0.0;
    for c in &cases {
        acc += (c.3 - top).exp();
        cum.push(acc);
    }
    let eps = &spec.epsilon_law;
    let s = run_trials(trials, seed, 1, |rng, out| {
        let u = rng.random::<f64>() * acc;
        let idx = cum.partition_point(|c| *c <= u).min(cases.len() - 1);
        let (inside, above, below, _) = cases[idx];
        // top two before and after refinement
        let mut before = [f64::NEG_INFINITY; 2];
        let mut after = [f64::NEG_INFINITY; 2];
        let push = |t: &mut [f64; 2], x: f64| {
            if x > t[0] {
                t[1] = t[0];
                t[0] = x;
            } else if x > t[1] {
                t[1] = x;
            }
        };
        if above == 1 {
            let x = f.quantile(c_hi + rng.random::<f64>() * p_above);
            push(&mut before, x);
            push(&mut after, x);
        }
        if below > 0 {
            // maximum of `below` draws restricted below the window
            let m = rng.random::<f64>().powf(1.0 / below as f64);
            let x = f.quantile(m * c_lo);
            push(&mut before, x);
            push(&mut after, x);
        }
        for _ in 0..inside {
            let x = f.quantile(c_lo + rng.random::<f64>() * p_in);
            push(&mut before, x);
            push(&mut after, x + eps.quantile(rng.random()));
        }
        out[0] = (after[0] - after[1]) - (before[0] - before[1]);
    });
    Ok(WelfareEstimate {
        v_star: spec.v_star,
        likelihood_ratio: likelihood_ratio(spec),
        welfare_effect: s[0].mean,
        std_error: s[0].std_error(),
    })
}

/// Welfare estimates on a grid of signal locations, point `i` seeded from
/// `seed` and `i`.
pub fn welfare_scan(
    spec: &RefinementSpec,
    grid: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<WelfareEstimate>> {
    grid.iter()
        .enumerate()
        .map(|(i, &v)| refinement_welfare(&spec.at(v)?, trials, shard_seed(seed, i as u64)))
        .collect()
}

/// Bisection for the signal location where the welfare effect changes sign
/// from negative to positive, between `lo` (negative) and `hi` (positive).
pub fn welfare_threshold(
    spec: &RefinementSpec,
    mut lo: f64,
    mut hi: f64,
    steps: usize,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    for i in 0..steps {
        let mid = 0.5 * (lo + hi);
        let w = refinement_welfare(
            &spec.at(mid)?,
            trials,
            shard_seed(seed, 1_000_000 + i as u64),
        )?;
        if w.welfare_effect < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
