//! Bidding under a cap on expected spend per opportunity.
//!
//! Spend at bid `b` against a law `F` is `∫_0^b p dF(p)`, the expected
//! price paid on won items. All solvers bisect this monotone function and
//! never use its derivative, so laws with density jumps are handled.

use serde::{Deserialize, Serialize};

use crate::binary::{check_price_law, check_values};
use crate::dist::{Distribution, Interval};
use crate::error::{check_range, invalid, Error, Result};

/// Bisection stops once the bracket is this narrow.
pub const BID_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBudgetScenario", into = "RawBudgetScenario")]
pub struct BudgetScenario {
    pi: f64,
    v_high: f64,
    v_low: f64,
    price_law_high: Distribution,
    price_law_low: Distribution,
    budget: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBudgetScenario {
    pi: f64,
    v_high: f64,
    v_low: f64,
    price_law_high: Distribution,
    price_law_low: Distribution,
    budget: f64,
}

impl TryFrom<RawBudgetScenario> for BudgetScenario {
    type Error = Error;

    fn try_from(r: RawBudgetScenario) -> Result<Self> {
        Self::new(
            r.pi,
            r.v_high,
            r.v_low,
            r.price_law_high,
            r.price_law_low,
            r.budget,
        )
    }
}

impl From<BudgetScenario> for RawBudgetScenario {
    fn from(s: BudgetScenario) -> Self {
        Self {
            pi: s.pi,
            v_high: s.v_high,
            v_low: s.v_low,
            price_law_high: s.price_law_high,
            price_law_low: s.price_law_low,
            budget: s.budget,
        }
    }
}

/// Bids with and without data under the cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetBids {
    pub bid_no_data: f64,
    pub bid_low: f64,
    pub bid_high: f64,
    /// `v_high / bid_high` when the cap binds with data, 1 otherwise.
    pub multiplier: f64,
    pub binding: bool,
}

/// One row of a budget sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetRow {
    pub budget: f64,
    pub bid_no_data: f64,
    pub bid_low: f64,
    pub bid_high: f64,
    pub value_of_data: f64,
}

fn spend(law: &Distribution, bid: f64) -> f64 {
    law.partial_mean(Interval::up_to(bid))
}

/// Smallest `b` in `[lo, hi]` with `spend(b) >= target` for a nondecreasing
/// `spend`, returned from the feasible side.
fn bisect_spend<S: Fn(f64) -> f64>(spend: S, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > BID_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if spend(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

impl BudgetScenario {
    pub fn new(
        pi: f64,
        v_high: f64,
        v_low: f64,
        price_law_high: Distribution,
        price_law_low: Distribution,
        budget: f64,
    ) -> Result<Self> {
        check_range("pi", pi, 0.0, 1.0)?;
        check_values(v_high, v_low)?;
        check_price_law("price_law_high", &price_law_high)?;
        check_price_law("price_law_low", &price_law_low)?;
        if !budget.is_finite() || budget < 0.0 {
            return invalid(
                "budget",
                format!("must be finite and nonnegative, got {budget}"),
            );
        }
        Ok(Self {
            pi,
            v_high,
            v_low,
            price_law_high,
            price_law_low,
            budget,
        })
    }

    /// Same scenario with a single competing-bid law for both types.
    pub fn independent(
        pi: f64,
        v_high: f64,
        v_low: f64,
        price_law: Distribution,
        budget: f64,
    ) -> Result<Self> {
        Self::new(pi, v_high, v_low, price_law.clone(), price_law, budget)
    }

    pub fn with_budget(&self, budget: f64) -> Result<Self> {
        let mut s = self.clone();
        if !budget.is_finite() || budget < 0.0 {
            return invalid(
                "budget",
                format!("must be finite and nonnegative, got {budget}"),
            );
        }
        s.budget = budget;
        Ok(s)
    }

    pub fn with_values(&self, v_high: f64, v_low: f64) -> Result<Self> {
        check_values(v_high, v_low)?;
        let mut s = self.clone();
        s.v_high = v_high;
        s.v_low = v_low;
        Ok(s)
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

    pub fn budget(&self) -> f64 {
        self.budget
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

    /// Expected spend bidding `b` on every item.
    pub fn spend_no_data(&self, b: f64) -> f64 {
        self.pi * spend(&self.price_law_high, b) + (1.0 - self.pi) * spend(&self.price_law_low, b)
    }

    /// Expected spend bidding `b_high` on H items and `b_low` on L items.
    pub fn spend_with_data(&self, b_high: f64, b_low: f64) -> f64 {
        self.pi * spend(&self.price_law_high, b_high)
            + (1.0 - self.pi) * spend(&self.price_law_low, b_low)
    }

    /// Expected utility bidding `b` on every item.
    pub fn utility_no_data(&self, b: f64) -> f64 {
        let iv = Interval::up_to(b);
        self.pi * self.price_law_high.linear(iv, self.v_high, -1.0)
            + (1.0 - self.pi) * self.price_law_low.linear(iv, self.v_low, -1.0)
    }

    /// Expected utility bidding per type.
    pub fn utility_with_data(&self, b_high: f64, b_low: f64) -> f64 {
        self.pi
            * self
                .price_law_high
                .linear(Interval::up_to(b_high), self.v_high, -1.0)
            + (1.0 - self.pi)
                * self
                    .price_law_low
                    .linear(Interval::up_to(b_low), self.v_low, -1.0)
    }
}

/// Bid without data: the mean value if its spend fits the cap, otherwise
/// the bid exhausting the cap.
pub fn solve_no_data_bid(sc: &BudgetScenario) -> f64 {
    let vbar = sc.mean_value();
    let b = sc.budget;
    if sc.spend_no_data(vbar) <= b {
        return vbar;
    }
    if b == 0.0 {
        return 0.0;
    }
    bisect_spend(|x| sc.spend_no_data(x), b, 0.0, vbar)
}

/// Bids with data. When the cap binds, bids keep the ratio `v_H / v_L`.
pub fn solve_budget_bids(sc: &BudgetScenario) -> Result<BudgetBids> {
    let bid_no_data = solve_no_data_bid(sc);
    let (vh, vl, b) = (sc.v_high, sc.v_low, sc.budget);
    if sc.spend_with_data(vh, vl) <= b {
        return Ok(BudgetBids {
            bid_no_data,
            bid_low: vl,
            bid_high: vh,
            multiplier: 1.0,
            binding: false,
        });
    }
    if vh == 0.0 {
        return Err(Error::DegenerateRatio);
    }
    let (bid_high, bid_low) = if b == 0.0 {
        (0.0, 0.0)
    } else if vl == 0.0 {
        // The ratio rule sends the whole cap to H items.
        let h = bisect_spend(|x| sc.pi * spend(&sc.price_law_high, x), b, 0.0, vh);
        (h, 0.0)
    } else {
        let ratio = vh / vl;
        let l = bisect_spend(|x| sc.spend_with_data(ratio * x, x), b, 0.0, vl);
        (ratio * l, l)
    };
    Ok(BudgetBids {
        bid_no_data,
        bid_low,
        bid_high,
        multiplier: if bid_high > 0.0 {
            vh / bid_high
        } else {
            f64::INFINITY
        },
        binding: true,
    })
}

/// Utility with data at the budgeted bids minus utility without.
pub fn budget_value_of_data(sc: &BudgetScenario) -> Result<f64> {
    let bids = solve_budget_bids(sc)?;
    Ok(sc.utility_with_data(bids.bid_high, bids.bid_low) - sc.utility_no_data(bids.bid_no_data))
}

pub fn sweep(sc: &BudgetScenario, budgets: &[f64]) -> Result<Vec<BudgetRow>> {
    budgets
        .iter()
        .map(|&budget| {
            let s = sc.with_budget(budget)?;
            let bids = solve_budget_bids(&s)?;
            Ok(BudgetRow {
                budget,
                bid_no_data: bids.bid_no_data,
                bid_low: bids.bid_low,
                bid_high: bids.bid_high,
                value_of_data: s.utility_with_data(bids.bid_high, bids.bid_low)
                    - s.utility_no_data(bids.bid_no_data),
            })
        })
        .collect()
}

/// `n` budgets evenly spaced on `[0, scale * spend(v̄)]`.
pub fn budget_grid(sc: &BudgetScenario, n: usize, scale: f64) -> Vec<f64> {
    let top = scale * sc.spend_no_data(sc.mean_value());
    crate::grid::linspace(0.0, top, n)
}
