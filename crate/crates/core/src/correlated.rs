//! Correlated values: the competing-bid law depends on the item type, so a
//! bidder without data faces `F_H` on H items and `F_L` on L items while
//! bidding a single amount.

use serde::{Deserialize, Serialize};

use crate::binary::{check_price_law, check_values, BinaryScenario};
use crate::dist::{Distribution, Interval};
use crate::error::{check_range, Error, Result};
use crate::grid::{is_single_peaked, linspace};

/// Grid points for the bid search.
pub const BID_GRID: usize = 1024;
/// Width at which golden-section refinement stops.
pub const BID_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCorrelatedScenario", into = "RawCorrelatedScenario")]
pub struct CorrelatedScenario {
    pi: f64,
    v_high: f64,
    v_low: f64,
    price_law_high: Distribution,
    price_law_low: Distribution,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorrelatedScenario {
    pi: f64,
    v_high: f64,
    v_low: f64,
    price_law_high: Distribution,
    price_law_low: Distribution,
}

impl TryFrom<RawCorrelatedScenario> for CorrelatedScenario {
    type Error = Error;

    fn try_from(r: RawCorrelatedScenario) -> Result<Self> {
        Self::new(r.pi, r.v_high, r.v_low, r.price_law_high, r.price_law_low)
    }
}

impl From<CorrelatedScenario> for RawCorrelatedScenario {
    fn from(s: CorrelatedScenario) -> Self {
        Self {
            pi: s.pi,
            v_high: s.v_high,
            v_low: s.v_low,
            price_law_high: s.price_law_high,
            price_law_low: s.price_law_low,
        }
    }
}

/// One point of a prior sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiRow {
    pub pi: f64,
    pub bid: f64,
    pub utility_without_data: f64,
    pub utility_with_data: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiProfile {
    pub rows: Vec<PiRow>,
    pub single_peaked: bool,
}

impl CorrelatedScenario {
    pub fn new(
        pi: f64,
        v_high: f64,
        v_low: f64,
        price_law_high: Distribution,
        price_law_low: Distribution,
    ) -> Result<Self> {
        check_range("pi", pi, 0.0, 1.0)?;
        check_values(v_high, v_low)?;
        check_price_law("price_law_high", &price_law_high)?;
        check_price_law("price_law_low", &price_law_low)?;
        Ok(Self {
            pi,
            v_high,
            v_low,
            price_law_high,
            price_law_low,
        })
    }

    pub fn with_pi(&self, pi: f64) -> Result<Self> {
        check_range("pi", pi, 0.0, 1.0)?;
        Ok(Self { pi, ..self.clone() })
    }

    pub fn with_values(&self, v_high: f64, v_low: f64) -> Result<Self> {
        check_values(v_high, v_low)?;
        Ok(Self {
            v_high,
            v_low,
            ..self.clone()
        })
    }

    pub fn pi(&self) -> f64 {
        self.pi
    }

    pub fn v_high(&self) -> f64 {
        self.v_high
    }

    pub fn v_low(&self) -> f64 {
        self.v_low
    }

    pub fn price_law_high(&self) -> &Distribution {
        &self.price_law_high
    }

    pub fn price_law_low(&self) -> &Distribution {
        &self.price_law_low
    }

    pub fn mean_value(&self) -> f64 {
        self.pi * self.v_high + (1.0 - self.pi) * self.v_low
    }

    /// Expected utility bidding `b` on every item.
    pub fn utility_without_data(&self, b: f64) -> f64 {
        let iv = Interval::up_to(b);
        self.pi * self.price_law_high.linear(iv, self.v_high, -1.0)
            + (1.0 - self.pi) * self.price_law_low.linear(iv, self.v_low, -1.0)
    }

    /// Expected utility bidding the true value of each item.
    pub fn utility_with_data(&self) -> f64 {
        self.pi
            * self
                .price_law_high
                .linear(Interval::up_to(self.v_high), self.v_high, -1.0)
            + (1.0 - self.pi)
                * self
                    .price_law_low
                    .linear(Interval::up_to(self.v_low), self.v_low, -1.0)
    }

    /// The same type structure facing the pooled law `π F_H + (1-π) F_L`
    /// independently of the type, with a perfect signal.
    pub fn pooled(&self) -> Result<BinaryScenario> {
        let law = if self.price_law_high == self.price_law_low {
            self.price_law_high.clone()
        } else {
            Distribution::mixture(
                vec![self.price_law_high.clone(), self.price_law_low.clone()],
                vec![self.pi, 1.0 - self.pi],
            )?
        };
        BinaryScenario::new(self.pi, self.v_high, self.v_low, 1.0, law)
    }

    /// First-order condition residual at `b`:
    /// `π f_H(b) (b - v_H) + (1-π) f_L(b) (b - v_L)`.
    pub fn eq_residual(&self, b: f64) -> f64 {
        self.pi * self.price_law_high.density(b) * (b - self.v_high)
            + (1.0 - self.pi) * self.price_law_low.density(b) * (b - self.v_low)
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn improves(u: f64, best: f64) -> bool {
    u > best + 1e-14 * best.abs().max(1.0)
}

/// Utility-maximizing single bid on `[v_L, v_H]`; ties go to the smallest bid.
pub fn no_data_bid(sc: &CorrelatedScenario) -> f64 {
    let (vl, vh) = (sc.v_low, sc.v_high);
    if sc.pi == 0.0 {
        return vl;
    }
    if sc.pi == 1.0 {
        return vh;
    }
    if sc.price_law_high == sc.price_law_low || vh == vl {
        return sc.mean_value();
    }
    let u = |b: f64| sc.utility_without_data(b);
    // The utility has kinks at price-law breakpoints and atoms; the optimum
    // often sits on one, so those bids are searched exactly.
    let mut grid = linspace(vl, vh, BID_GRID);
    for law in [&sc.price_law_high, &sc.price_law_low] {
        let kinks = law
            .breakpoints()
            .into_iter()
            .chain(law.atoms().into_iter().map(|a| a.0));
        grid.extend(kinks.filter(|&b| vl < b && b < vh));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut best_i = 0;
    let mut best = u(grid[0]);
    for (i, &b) in grid.iter().enumerate().skip(1) {
        let ub = u(b);
        if improves(ub, best) {
            best = ub;
            best_i = i;
        }
    }
    let lo = grid[best_i.saturating_sub(1)];
    let hi = grid[(best_i + 1).min(grid.len() - 1)];
    let refined = golden_max(&u, lo, hi, BID_TOL);
    if improves(u(refined), best) {
        refined
    } else {
        grid[best_i]
    }
}

pub fn correlated_value_of_data(sc: &CorrelatedScenario) -> f64 {
    sc.utility_with_data() - sc.utility_without_data(no_data_bid(sc))
}

/// All grid-bracketed zeros of the first-order residual on `[v_L, v_H]`,
/// refined by bisection.
pub fn eq_roots(sc: &CorrelatedScenario) -> Vec<f64> {
    let grid = linspace(sc.v_low, sc.v_high, BID_GRID);
    let r: Vec<f64> = grid.iter().map(|&b| sc.eq_residual(b)).collect();
    let mut roots = Vec::new();
    for i in 0..grid.len() {
        if r[i] == 0.0 {
            roots.push(grid[i]);
            continue;
        }
        if i + 1 < grid.len() && r[i + 1] != 0.0 && (r[i] < 0.0) != (r[i + 1] < 0.0) {
            let (mut a, mut b) = (grid[i], grid[i + 1]);
            let neg_at_a = r[i] < 0.0;
            while b - a > BID_TOL {
                let m = 0.5 * (a + b);
                if (sc.eq_residual(m) < 0.0) == neg_at_a {
                    a = m;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    roots
}

pub fn pi_profile(sc: &CorrelatedScenario, grid: &[f64]) -> Result<PiProfile> {
    let rows = grid
        .iter()
        .map(|&pi| {
            let s = sc.with_pi(pi)?;
            let bid = no_data_bid(&s);
            let without = s.utility_without_data(bid);
            let with = s.utility_with_data();
            Ok(PiRow {
                pi,
                bid,
                utility_without_data: without,
                utility_with_data: with,
                value: with - without,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    Ok(PiProfile {
        single_peaked: is_single_peaked(&values, 1e-9),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(lo: f64, hi: f64) -> Distribution {
        Distribution::uniform(lo, hi).unwrap()
    }

    #[test]
    fn common_law_bids_the_mean() {
        let sc = CorrelatedScenario::new(0.3, 1.0, 0.2, u(0.0, 1.0), u(0.0, 1.0)).unwrap();
        assert_eq!(no_data_bid(&sc), sc.mean_value());
        let ipv = sc.pooled().unwrap().signal_value();
        assert!((correlated_value_of_data(&sc) - ipv).abs() < 1e-14);
    }

    #[test]
    fn degenerate_priors() {
        let sc = CorrelatedScenario::new(0.0, 1.0, 0.2, u(0.0, 1.0), u(0.5, 1.0)).unwrap();
        assert_eq!(no_data_bid(&sc), 0.2);
        assert_eq!(no_data_bid(&sc.with_pi(1.0).unwrap()), 1.0);
    }

    #[test]
    fn segmented_market_against_the_advertiser() {
        let sc = CorrelatedScenario::new(0.5, 1.0, 0.0, u(0.0, 0.5), u(0.5, 1.0)).unwrap();
        assert!((no_data_bid(&sc) - 0.5).abs() < 1e-6);
        assert!(correlated_value_of_data(&sc).abs() < 1e-9);
    }

    #[test]
    fn segmented_market_in_favor_of_the_advertiser() {
        // Bidding 0 and bidding 1 both give 0 without data; bidding the
        // value gives 1/8.
        let sc = CorrelatedScenario::new(0.5, 1.0, 0.0, u(0.5, 1.0), u(0.0, 0.5)).unwrap();
        assert_eq!(no_data_bid(&sc), 0.0);
        assert!((sc.utility_with_data() - 0.125).abs() < 1e-15);
        assert!((sc.pooled().unwrap().signal_value() - 0.125).abs() < 1e-15);
        assert!(eq_roots(&sc).contains(&0.0));
    }

    #[test]
    fn correlation_can_raise_the_value() {
        let sc = CorrelatedScenario::new(0.75, 1.0, 0.0, u(0.5, 1.0), u(0.5, 0.75)).unwrap();
        assert!((correlated_value_of_data(&sc) - 5.0 / 32.0).abs() < 1e-9);
        assert!((sc.pooled().unwrap().signal_value() - 17.0 / 128.0).abs() < 1e-12);
    }

    #[test]
    fn interior_optimum_solves_first_order_condition() {
        let sc = CorrelatedScenario::new(0.4, 1.0, 0.1, u(0.2, 1.2), u(0.0, 0.8)).unwrap();
        let b = no_data_bid(&sc);
        assert!(sc.eq_residual(b).abs() < 1e-6, "{}", sc.eq_residual(b));
        let roots = eq_roots(&sc);
        assert!(roots.iter().any(|r| (r - b).abs() < 1e-8));
        for g in linspace(sc.v_low(), sc.v_high(), BID_GRID) {
            assert!(sc.utility_without_data(b) >= sc.utility_without_data(g) - 1e-15);
        }
    }

    #[test]
    fn profile_of_shifted_uniforms_is_single_peaked() {
        let sc = CorrelatedScenario::new(0.5, 1.0, 0.2, u(0.3, 1.3), u(0.0, 1.0)).unwrap();
        let grid = linspace(0.01, 0.99, 99);
        let p = pi_profile(&sc, &grid).unwrap();
        assert!(p.single_peaked);
        assert!(p.rows.iter().all(|r| r.value >= -1e-9));
    }
}
