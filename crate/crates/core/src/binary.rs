//! Two-type valuation with a single noisy binary signal.
//!
//! Items are of type H with probability `pi` and L otherwise. A signal of
//! quality `q` reports the true type with probability `q`. All competing-bid
//! laws here are independent of the type.

use serde::{Deserialize, Serialize};

use crate::dist::{Distribution, Interval};
use crate::error::{check_range, invalid, Error, Result};

/// The two-type world with an independent competing-bid law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBinaryScenario", into = "RawBinaryScenario")]
pub struct BinaryScenario {
    pi: f64,
    v_high: f64,
    v_low: f64,
    q: f64,
    price_law: Distribution,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBinaryScenario {
    pi: f64,
    v_high: f64,
    v_low: f64,
    q: f64,
    price_law: Distribution,
}

impl TryFrom<RawBinaryScenario> for BinaryScenario {
    type Error = Error;

    fn try_from(r: RawBinaryScenario) -> Result<Self> {
        Self::new(r.pi, r.v_high, r.v_low, r.q, r.price_law)
    }
}

impl From<BinaryScenario> for RawBinaryScenario {
    fn from(s: BinaryScenario) -> Self {
        Self {
            pi: s.pi,
            v_high: s.v_high,
            v_low: s.v_low,
            q: s.q,
            price_law: s.price_law,
        }
    }
}

/// Posterior type probabilities and conditional values after each signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PosteriorPair {
    pub pi_given_h: f64,
    pub pi_given_l: f64,
    pub v_given_h: f64,
    pub v_given_l: f64,
}

pub(crate) fn check_values(v_high: f64, v_low: f64) -> Result<()> {
    if !v_high.is_finite() || !v_low.is_finite() || v_low < 0.0 || v_high < v_low {
        return invalid(
            "values",
            format!("need v_high >= v_low >= 0, got v_high = {v_high}, v_low = {v_low}"),
        );
    }
    Ok(())
}

pub(crate) fn check_price_law(what: &'static str, d: &Distribution) -> Result<()> {
    if d.support().0 < 0.0 {
        return invalid(what, "competing bids must be nonnegative");
    }
    Ok(())
}

impl BinaryScenario {
    pub fn new(pi: f64, v_high: f64, v_low: f64, q: f64, price_law: Distribution) -> Result<Self> {
        check_range("pi", pi, 0.0, 1.0)?;
        check_range("q", q, 0.5, 1.0)?;
        check_values(v_high, v_low)?;
        check_price_law("price_law", &price_law)?;
        Ok(Self {
            pi,
            v_high,
            v_low,
            q,
            price_law,
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

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn price_law(&self) -> &Distribution {
        &self.price_law
    }

    pub fn with_pi(&self, pi: f64) -> Result<Self> {
        Self::new(pi, self.v_high, self.v_low, self.q, self.price_law.clone())
    }

    pub fn with_q(&self, q: f64) -> Result<Self> {
        Self::new(self.pi, self.v_high, self.v_low, q, self.price_law.clone())
    }

    /// Prior expected value `pi v_H + (1 - pi) v_L`.
    pub fn mean_value(&self) -> f64 {
        self.pi * self.v_high + (1.0 - self.pi) * self.v_low
    }

    /// Probability of observing a high signal.
    pub fn prob_high_signal(&self) -> f64 {
        self.pi * self.q + (1.0 - self.pi) * (1.0 - self.q)
    }

    pub fn posterior(&self) -> PosteriorPair {
        let (pi, q) = (self.pi, self.q);
        let den_h = pi * q + (1.0 - pi) * (1.0 - q);
        let den_l = pi * (1.0 - q) + (1.0 - pi) * q;
        // A zero denominator means that signal never occurs; keep the prior.
        let pi_given_h = if den_h > 0.0 { pi * q / den_h } else { pi };
        let pi_given_l = if den_l > 0.0 {
            pi * (1.0 - q) / den_l
        } else {
            pi
        };
        PosteriorPair {
            pi_given_h,
            pi_given_l,
            v_given_h: self.value_at(pi_given_h),
            v_given_l: self.value_at(pi_given_l),
        }
    }

    fn value_at(&self, p: f64) -> f64 {
        p * self.v_high + (1.0 - p) * self.v_low
    }

    /// Expected utility bidding `mean_value` on every item.
    pub fn utility_without_data(&self) -> f64 {
        let vbar = self.mean_value();
        self.price_law.linear(Interval::up_to(vbar), vbar, -1.0)
    }

    /// Expected utility bidding the posterior value after each signal.
    pub fn utility_with_data(&self) -> f64 {
        let post = self.posterior();
        let ph = self.prob_high_signal();
        let f = &self.price_law;
        ph * f.linear(Interval::up_to(post.v_given_h), post.v_given_h, -1.0)
            + (1.0 - ph) * f.linear(Interval::up_to(post.v_given_l), post.v_given_l, -1.0)
    }

    /// Value of the signal as the difference of two integrals over the price
    /// ranges where the bid moves up (after `h`) and down (after `l`).
    pub fn signal_value(&self) -> f64 {
        let (pi, q, vh, vl) = (self.pi, self.q, self.v_high, self.v_low);
        let post = self.posterior();
        let vbar = self.mean_value();
        let f = &self.price_law;
        let gain = f.linear(
            Interval::between(vbar, post.v_given_h),
            pi * q * vh + (1.0 - pi) * (1.0 - q) * vl,
            -(pi * q + (1.0 - pi) * (1.0 - q)),
        );
        let saved = f.linear(
            Interval::between(post.v_given_l, vbar),
            pi * (1.0 - q) * vh + (1.0 - pi) * q * vl,
            -(pi * (1.0 - q) + (1.0 - pi) * q),
        );
        gain - saved
    }

    /// `(v_H - v_L) pi (1 - pi) (2q - 1) (F(v|h) - F(v|l))`.
    pub fn value_upper_bound(&self) -> f64 {
        let post = self.posterior();
        (self.v_high - self.v_low)
            * self.pi
            * (1.0 - self.pi)
            * (2.0 * self.q - 1.0)
            * self
                .price_law
                .mass(Interval::between(post.v_given_l, post.v_given_h))
    }

    /// Supremum of the price density on `[v_L, v_H]`.
    pub fn f_bar(&self) -> Result<f64> {
        self.price_law.density_sup(self.v_low, self.v_high)
    }

    /// [`quality_value_bound`] with `f_bar` taken from the price law.
    pub fn quality_bound(&self) -> Result<f64> {
        Ok(quality_value_bound(
            self.q,
            self.v_high,
            self.v_low,
            self.f_bar()?,
        ))
    }
}

/// Prior-free bound on the value of a quality-`q` signal:
/// `(v_H - v_L)^2 f_bar (2/3 q^3 - 1/2 q^2 + 1/24)`.
pub fn quality_value_bound(q: f64, v_high: f64, v_low: f64, f_bar: f64) -> f64 {
    let spread = v_high - v_low;
    spread * spread * f_bar * quality_poly(q)
}

// 2/3 q^3 - 1/2 q^2 + 1/24 in factored form, exactly zero at q = 1/2.
fn quality_poly(q: f64) -> f64 {
    let d = 2.0 * q - 1.0;
    d * d * (4.0 * q + 1.0) / 24.0
}

/// Largest amount a quality-`q1` signal can be worth above a quality-`q2`
/// one, for any prior.
pub fn max_quality_premium(q1: f64, q2: f64, v_high: f64, v_low: f64, f_bar: f64) -> Result<f64> {
    if q1.is_nan() || q2.is_nan() || q1 <= q2 {
        return Err(Error::InvalidOrder { q1, q2 });
    }
    let spread = v_high - v_low;
    Ok(f_bar * spread * spread * (quality_poly(q1) - quality_poly(q2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(pi: f64, q: f64) -> BinaryScenario {
        BinaryScenario::new(pi, 1.0, 0.0, q, Distribution::uniform(0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn posterior_examples() {
        let p = scenario(0.5, 0.75).posterior();
        assert!((p.pi_given_h - 0.75).abs() < 1e-15);
        let s = scenario(0.3, 0.5);
        let p = s.posterior();
        assert_eq!(p.pi_given_h, 0.3);
        assert_eq!(p.pi_given_l, 0.3);
        let p = scenario(0.5, 1.0).posterior();
        assert_eq!(p.pi_given_h, 1.0);
        assert_eq!(p.v_given_h, 1.0);
    }

    #[test]
    fn uninformative_signal_is_worthless() {
        for pi in [0.1, 0.5, 0.9] {
            assert_eq!(scenario(pi, 0.5).signal_value(), 0.0);
            assert_eq!(scenario(pi, 0.5).value_upper_bound(), 0.0);
        }
    }

    #[test]
    fn perfect_signal_value() {
        // u_D = 1/4, u_ND = 1/8
        let s = scenario(0.5, 1.0);
        assert!((s.signal_value() - 0.125).abs() < 1e-15);
        assert!((s.utility_with_data() - 0.25).abs() < 1e-15);
        assert!((s.utility_without_data() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn bound_example() {
        let s = scenario(0.5, 0.75);
        assert!((s.value_upper_bound() - 1.0 / 16.0).abs() < 1e-15);
        assert!(s.signal_value() <= 1.0 / 16.0);
        assert_eq!(scenario(0.0, 0.8).value_upper_bound(), 0.0);
        assert_eq!(scenario(1.0, 0.8).value_upper_bound(), 0.0);
    }

    #[test]
    fn quality_bound_polynomial() {
        assert_eq!(quality_value_bound(0.5, 1.0, 0.0, 1.0), 0.0);
        assert!((quality_value_bound(1.0, 1.0, 0.0, 1.0) - 5.0 / 24.0).abs() < 1e-15);
        let p = max_quality_premium(1.0, 0.5, 1.0, 0.0, 1.0).unwrap();
        assert!((p - 5.0 / 24.0).abs() < 1e-15);
        assert!(matches!(
            max_quality_premium(0.7, 0.7, 1.0, 0.0, 1.0),
            Err(Error::InvalidOrder { .. })
        ));
    }

    #[test]
    fn quality_bound_rejects_atoms() {
        let s = BinaryScenario::new(0.5, 1.0, 0.0, 0.75, Distribution::point_mass(0.8).unwrap())
            .unwrap();
        assert!(matches!(s.quality_bound(), Err(Error::AtomInRange { .. })));
    }

    #[test]
    fn rejects_invalid_scenarios() {
        let f = Distribution::uniform(0.0, 1.0).unwrap();
        assert!(BinaryScenario::new(1.2, 1.0, 0.0, 0.7, f.clone()).is_err());
        assert!(BinaryScenario::new(0.5, 1.0, 0.0, 0.4, f.clone()).is_err());
        assert!(BinaryScenario::new(0.5, 0.2, 0.4, 0.7, f.clone()).is_err());
        let negative = Distribution::uniform(-1.0, 1.0).unwrap();
        assert!(BinaryScenario::new(0.5, 1.0, 0.0, 0.7, negative).is_err());
    }
}
