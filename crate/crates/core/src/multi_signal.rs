//! Bundles of `n` conditionally independent signals of equal quality.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::binary::BinaryScenario;
use crate::dist::Interval;
use crate::error::{invalid, Result};

/// Above this many signals, probabilities are computed in log space.
pub const LOG_SPACE_ABOVE: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalBundle {
    pub base: BinaryScenario,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalRow {
    pub n: usize,
    pub utility: f64,
    /// `utility(n) - utility(n - 1)`; zero for `n = 0`.
    pub marginal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalReport {
    pub rows: Vec<MarginalRow>,
    /// The first signal is worth nothing.
    pub first_zero: bool,
    /// Some later signal is worth something.
    pub later_positive: bool,
    /// The last marginal value is below `1e-4`.
    pub vanishing_tail: bool,
}

// x ln y with 0 ln 0 = 0.
fn xlny(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// Probability of type H after `k` high signals out of `n`.
pub fn posterior_after_counts(pi: f64, q: f64, k: usize, n: usize) -> f64 {
    debug_assert!(k <= n);
    if pi == 0.0 || pi == 1.0 {
        return pi;
    }
    let (kf, mf) = (k as f64, (n - k) as f64);
    if n <= LOG_SPACE_ABOVE {
        let a = pi * q.powi(k as i32) * (1.0 - q).powi((n - k) as i32);
        let b = (1.0 - pi) * (1.0 - q).powi(k as i32) * q.powi((n - k) as i32);
        if a + b > 0.0 {
            return a / (a + b);
        }
        return pi;
    }
    let la = pi.ln() + xlny(kf, q) + xlny(mf, 1.0 - q);
    let lb = (1.0 - pi).ln() + xlny(kf, 1.0 - q) + xlny(mf, q);
    if la == f64::NEG_INFINITY && lb == f64::NEG_INFINITY {
        return pi;
    }
    1.0 / (1.0 + (lb - la).exp())
}

fn ln_choose(n: usize, k: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

fn choose(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

/// Probability of seeing exactly `k` high signals out of `n`.
pub fn count_probability(pi: f64, q: f64, k: usize, n: usize) -> f64 {
    let (kf, mf) = (k as f64, (n - k) as f64);
    if n <= LOG_SPACE_ABOVE {
        let c = choose(n, k);
        return c
            * (pi * q.powi(k as i32) * (1.0 - q).powi((n - k) as i32)
                + (1.0 - pi) * (1.0 - q).powi(k as i32) * q.powi((n - k) as i32));
    }
    let lc = ln_choose(n, k);
    let high = xlny(kf, q) + xlny(mf, 1.0 - q);
    let low = xlny(kf, 1.0 - q) + xlny(mf, q);
    pi * (lc + high).exp() + (1.0 - pi) * (lc + low).exp()
}

/// Expected utility bidding the posterior value after each count outcome.
pub fn bundle_utility(b: &SignalBundle) -> f64 {
    let s = &b.base;
    let f = s.price_law();
    (0..=b.n)
        .map(|k| {
            let p = count_probability(s.pi(), s.q(), k, b.n);
            if p == 0.0 {
                return 0.0;
            }
            let post = posterior_after_counts(s.pi(), s.q(), k, b.n);
            let v = post * s.v_high() + (1.0 - post) * s.v_low();
            p * f.linear(Interval::up_to(v), v, -1.0)
        })
        .sum()
}

pub fn marginal_values(base: &BinaryScenario, n_max: usize) -> Result<MarginalReport> {
    if n_max < 1 {
        return invalid("n_max", "need at least one signal");
    }
    let mut rows = Vec::with_capacity(n_max + 1);
    let mut prev = 0.0;
    for n in 0..=n_max {
        let utility = bundle_utility(&SignalBundle {
            base: base.clone(),
            n,
        });
        rows.push(MarginalRow {
            n,
            utility,
            marginal: if n == 0 { 0.0 } else { utility - prev },
        });
        prev = utility;
    }
    Ok(MarginalReport {
        first_zero: rows[1].marginal.abs() <= 1e-15,
        later_positive: rows[2..].iter().any(|r| r.marginal > 1e-15),
        vanishing_tail: rows[n_max].marginal < 1e-4,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Distribution;

    fn point_price_scenario() -> BinaryScenario {
        BinaryScenario::new(0.5, 1.0, 0.0, 0.75, Distribution::point_mass(0.8).unwrap()).unwrap()
    }

    #[test]
    fn posterior_examples() {
        assert!((posterior_after_counts(0.5, 0.75, 1, 1) - 0.75).abs() < 1e-14);
        assert!((posterior_after_counts(0.5, 0.75, 2, 2) - 0.9).abs() < 1e-14);
        for k in 0..40 {
            let p = posterior_after_counts(0.3, 0.8, k, 2 * k);
            assert!((p - 0.3).abs() < 1e-12);
        }
        assert!((posterior_after_counts(0.3, 0.8, 30, 60) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn log_space_agrees_with_direct() {
        // 52 signals with 2k - n = 2 behaves like 2 high out of 2.
        let direct = posterior_after_counts(0.4, 0.7, 2, 2);
        let logged = posterior_after_counts(0.4, 0.7, 27, 52);
        assert!((direct - logged).abs() < 1e-12);
    }

    #[test]
    fn perfect_signals_and_impossible_counts() {
        assert_eq!(posterior_after_counts(0.4, 1.0, 3, 3), 1.0);
        assert_eq!(posterior_after_counts(0.4, 1.0, 0, 3), 0.0);
        assert_eq!(posterior_after_counts(0.4, 1.0, 1, 3), 0.4);
        assert_eq!(posterior_after_counts(0.4, 1.0, 1, 80), 0.4);
    }

    #[test]
    fn count_probabilities_sum_to_one() {
        for n in [0, 1, 5, 50, 51, 120] {
            let s: f64 = (0..=n).map(|k| count_probability(0.3, 0.7, k, n)).sum();
            assert!((s - 1.0).abs() < 1e-10, "n = {n}: {s}");
        }
    }

    #[test]
    fn first_signal_worthless_second_valuable() {
        let r = marginal_values(&point_price_scenario(), 60).unwrap();
        assert_eq!(r.rows[1].marginal, 0.0);
        assert!((r.rows[2].marginal - 1.0 / 32.0).abs() < 1e-14);
        // Exact rational evaluation gives 1.5265520451409778e-6.
        assert!((r.rows[60].marginal - 1.5265520451409778e-6).abs() < 1e-12);
        assert!(r.first_zero && r.later_positive && r.vanishing_tail);
    }

    #[test]
    fn one_signal_reduces_to_binary_value() {
        let base =
            BinaryScenario::new(0.3, 1.0, 0.2, 0.8, Distribution::uniform(0.0, 1.0).unwrap())
                .unwrap();
        let u0 = bundle_utility(&SignalBundle {
            base: base.clone(),
            n: 0,
        });
        let u1 = bundle_utility(&SignalBundle {
            base: base.clone(),
            n: 1,
        });
        assert!((u0 - base.utility_without_data()).abs() < 1e-14);
        assert!((u1 - u0 - base.signal_value()).abs() < 1e-14);
    }
}
