//! Value profiles consistent with observed average bids per segment.
//!
//! Users fall in three segments. A publisher sees the advertiser's average
//! bid `b_12` on segments 1 and 2 together and `b_3` on segment 3. The
//! profiles indexed by `alpha` all reproduce those averages, yet the value
//! of the publisher's segment data moves from its maximum at `alpha = 0`
//! down to zero at `alpha = 1`.

use serde::{Deserialize, Serialize};

use crate::binary::check_price_law;
use crate::dist::{Distribution, Interval};
use crate::error::{check_range, invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawForensicsSpec", into = "RawForensicsSpec")]
pub struct ForensicsSpec {
    pi_1: f64,
    pi_2: f64,
    pi_3: f64,
    b_12: f64,
    b_3: f64,
    price_law: Distribution,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawForensicsSpec {
    pi_1: f64,
    pi_2: f64,
    pi_3: f64,
    b_12: f64,
    b_3: f64,
    price_law: Distribution,
}

impl TryFrom<RawForensicsSpec> for ForensicsSpec {
    type Error = Error;

    fn try_from(r: RawForensicsSpec) -> Result<Self> {
        Self::new(r.pi_1, r.pi_2, r.pi_3, r.b_12, r.b_3, r.price_law)
    }
}

impl From<ForensicsSpec> for RawForensicsSpec {
    fn from(s: ForensicsSpec) -> Self {
        Self {
            pi_1: s.pi_1,
            pi_2: s.pi_2,
            pi_3: s.pi_3,
            b_12: s.b_12,
            b_3: s.b_3,
            price_law: s.price_law,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaProfile {
    pub alpha: f64,
    pub v_1: f64,
    pub v_2: f64,
    /// Bid on segment 1-or-2 users outside the advertiser's own subset.
    pub b_2: f64,
    /// Bid on those users without the publisher's data.
    pub b_hat: f64,
}

impl ForensicsSpec {
    pub fn new(
        pi_1: f64,
        pi_2: f64,
        pi_3: f64,
        b_12: f64,
        b_3: f64,
        price_law: Distribution,
    ) -> Result<Self> {
        for (what, p) in [("pi_1", pi_1), ("pi_2", pi_2), ("pi_3", pi_3)] {
            check_range(what, p, 0.0, 1.0)?;
            if p == 0.0 {
                return invalid(what, "segment probabilities must be positive");
            }
        }
        if (pi_1 + pi_2 + pi_3 - 1.0).abs() > 1e-12 {
            return invalid("pi", "segment probabilities must sum to 1");
        }
        if !b_12.is_finite() || !b_3.is_finite() || b_3 < 0.0 || b_12 <= b_3 {
            return invalid(
                "bids",
                format!("need b_12 > b_3 >= 0, got {b_12} and {b_3}"),
            );
        }
        check_price_law("price_law", &price_law)?;
        Ok(Self {
            pi_1,
            pi_2,
            pi_3,
            b_12,
            b_3,
            price_law,
        })
    }

    pub fn pi(&self) -> (f64, f64, f64) {
        (self.pi_1, self.pi_2, self.pi_3)
    }

    pub fn b_12(&self) -> f64 {
        self.b_12
    }

    pub fn b_3(&self) -> f64 {
        self.b_3
    }

    pub fn price_law(&self) -> &Distribution {
        &self.price_law
    }
}

pub fn build_profile(spec: &ForensicsSpec, alpha: f64) -> Result<AlphaProfile> {
    check_range("alpha", alpha, 0.0, 1.0)?;
    let (p1, p2, p3) = (spec.pi_1, spec.pi_2, spec.pi_3);
    let (b12, b3) = (spec.b_12, spec.b_3);
    let v_1 = b12 + alpha * (p2 / p1) * (b12 - b3);
    let v_2 = (1.0 - alpha) * b12 + alpha * b3;
    let rest = (1.0 - alpha) * p1 + p2;
    let b_2 = ((1.0 - alpha) * p1 * v_1 + p2 * v_2) / rest;
    let b_hat = (rest * b_2 + p3 * b3) / (rest + p3);
    Ok(AlphaProfile {
        alpha,
        v_1,
        v_2,
        b_2,
        b_hat,
    })
}

/// Average segment 1-or-2 bid implied by a profile.
pub fn implied_average_bid(spec: &ForensicsSpec, p: &AlphaProfile) -> f64 {
    (spec.pi_1 * p.v_1 + spec.pi_2 * p.v_2) / (spec.pi_1 + spec.pi_2)
}

/// Value of the publisher's segment data under profile `alpha`.
pub fn targeting_value(spec: &ForensicsSpec, alpha: f64) -> Result<f64> {
    let p = build_profile(spec, alpha)?;
    let f = &spec.price_law;
    let rest = (1.0 - alpha) * spec.pi_1 + spec.pi_2;
    let upper = f.linear(Interval::between(p.b_hat, p.b_2), p.b_2, -1.0);
    let lower = f.linear(Interval::between(spec.b_3, p.b_hat), -spec.b_3, 1.0);
    Ok(rest * upper + spec.pi_3 * lower)
}

/// Range of data values consistent with the observed bids.
pub fn value_range(spec: &ForensicsSpec) -> Result<(f64, f64)> {
    Ok((0.0, targeting_value(spec, 0.0)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ForensicsSpec {
        let t = 1.0 / 3.0;
        ForensicsSpec::new(
            t,
            t,
            t,
            2.0 / 3.0,
            1.0 / 3.0,
            Distribution::uniform(0.0, 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn endpoints() {
        let s = spec();
        let p = build_profile(&s, 0.0).unwrap();
        assert_eq!((p.v_1, p.v_2, p.b_2), (s.b_12(), s.b_12(), s.b_12()));
        let p = build_profile(&s, 1.0).unwrap();
        assert!((p.v_2 - s.b_3()).abs() < 1e-15);
        assert!((p.b_2 - s.b_3()).abs() < 1e-15);
        assert!(targeting_value(&s, 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn average_bid_is_invariant() {
        let s = spec();
        for i in 0..=100 {
            let p = build_profile(&s, i as f64 / 100.0).unwrap();
            assert!((implied_average_bid(&s, &p) - s.b_12()).abs() < 1e-12);
        }
    }

    #[test]
    fn full_value_for_uniform_prices() {
        // b = 5/9: (2/3)(1/9)^2/2 + (1/3)(2/9)^2/2 = 1/243 + 2/243
        let v = targeting_value(&spec(), 0.0).unwrap();
        assert!((v - 3.0 / 243.0).abs() < 1e-15);
    }

    #[test]
    fn no_mass_between_bids_means_no_value() {
        let t = 1.0 / 3.0;
        let s = ForensicsSpec::new(t, t, t, 0.6, 0.4, Distribution::uniform(0.7, 1.0).unwrap())
            .unwrap();
        assert_eq!(value_range(&s).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn rejects_bad_specs() {
        let f = Distribution::uniform(0.0, 1.0).unwrap();
        assert!(ForensicsSpec::new(0.5, 0.5, 0.0, 0.6, 0.4, f.clone()).is_err());
        assert!(ForensicsSpec::new(0.2, 0.3, 0.5, 0.4, 0.6, f.clone()).is_err());
        assert!(ForensicsSpec::new(0.2, 0.3, 0.5, 0.6, -0.1, f).is_err());
        assert!(build_profile(&spec(), 1.5).is_err());
    }
}
