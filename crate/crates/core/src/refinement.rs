//! General data sources: the advertiser learns a refined value estimate
//! `v ~ G` with `E[v]` equal to the prior mean, and bids it.

use serde::{Deserialize, Serialize};

use crate::dist::{Distribution, Interval};
use crate::error::{Error, Result};

/// A data source described by the law of the estimate it reveals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Distribution", into = "Distribution")]
pub struct DataSource {
    value_law: Distribution,
    mean: f64,
}

impl From<Distribution> for DataSource {
    fn from(value_law: Distribution) -> Self {
        Self::new(value_law)
    }
}

impl From<DataSource> for Distribution {
    fn from(s: DataSource) -> Self {
        s.value_law
    }
}

impl DataSource {
    pub fn new(value_law: Distribution) -> Self {
        let mean = value_law.mean();
        Self { value_law, mean }
    }

    pub fn value_law(&self) -> &Distribution {
        &self.value_law
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }
}

/// Gain from bidding `v` instead of `mean` when the value is `v`:
/// `∫_{mean}^{v} (v - p) dF(p)`, nonnegative on both sides of the mean.
pub fn bid_gain(price_law: &Distribution, mean: f64, v: f64) -> f64 {
    if v >= mean {
        price_law.linear(Interval::between(mean, v), v, -1.0)
    } else {
        -price_law.linear(Interval::between(v, mean), v, -1.0)
    }
}

/// Expected utility gain from learning the estimate drawn from `src` and
/// bidding it, over bidding its mean on every item.
pub fn data_source_utility(src: &DataSource, price_law: &Distribution) -> Result<f64> {
    let mut splits = price_law.breakpoints();
    splits.extend(price_law.atoms().iter().map(|a| a.0));
    splits.push(src.mean);
    src.value_law.expect_over_split(
        Interval::whole(),
        |v| bid_gain(price_law, src.mean, v),
        &splits,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SosdRelation {
    Dominates,
    DominatedBy,
    Incomparable,
}

/// Tolerance on the integrated CDF gap.
pub const SOSD_TOL: f64 = 1e-9;

const SOSD_GRID: usize = 512;

/// Minimum over `x` of `∫_{-inf}^x [G(t) - H(t)] dt`, evaluated on the union
/// of both laws' breakpoints and atoms, a uniform grid over the joint
/// support, and the crossings of `G - H` between adjacent grid points.
pub fn integrated_gap_min(h: &Distribution, g: &Distribution) -> f64 {
    let (hl, hh) = h.effective_support();
    let (gl, gh) = g.effective_support();
    let (lo, hi) = (hl.min(gl), hh.max(gh));
    let mut xs = Vec::with_capacity(SOSD_GRID + 16);
    for d in [h, g] {
        xs.extend(d.breakpoints());
        xs.extend(d.atoms().iter().map(|a| a.0));
    }
    if hi > lo {
        let step = (hi - lo) / (SOSD_GRID - 1) as f64;
        xs.extend((0..SOSD_GRID).map(|i| lo + step * i as f64));
    }
    xs.push(lo);
    xs.push(hi);
    xs.retain(|x| x.is_finite());
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let gap = |x: f64| g.integrated_cdf(x) - h.integrated_cdf(x);
    let diff = |x: f64| g.cdf(x) - h.cdf(x);
    let mut min = f64::INFINITY;
    for w in xs.windows(2) {
        min = min.min(gap(w[0]));
        let (d0, d1) = (diff(w[0]), diff(w[1]));
        if d0 < 0.0 && d1 > 0.0 || d0 > 0.0 && d1 < 0.0 {
            let x = w[0] + (w[1] - w[0]) * d0 / (d0 - d1);
            min = min.min(gap(x));
        }
    }
    if let Some(last) = xs.last() {
        min = min.min(gap(*last));
    }
    min
}

/// Second-order stochastic dominance between two equal-mean sources.
pub fn sosd_check(dominant: &DataSource, dominated: &DataSource) -> Result<SosdRelation> {
    if (dominant.mean - dominated.mean).abs() > SOSD_TOL {
        return Err(Error::MeanMismatch {
            dominant: dominant.mean,
            dominated: dominated.mean,
        });
    }
    let (h, g) = (&dominant.value_law, &dominated.value_law);
    if integrated_gap_min(h, g) >= -SOSD_TOL {
        Ok(SosdRelation::Dominates)
    } else if integrated_gap_min(g, h) >= -SOSD_TOL {
        Ok(SosdRelation::DominatedBy)
    } else {
        Ok(SosdRelation::Incomparable)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::BinaryScenario;

    fn src(d: Distribution) -> DataSource {
        DataSource::new(d)
    }

    #[test]
    fn point_mass_source_is_worthless() {
        let f = Distribution::uniform(0.0, 1.0).unwrap();
        let s = src(Distribution::point_mass(0.4).unwrap());
        assert_eq!(data_source_utility(&s, &f).unwrap(), 0.0);
    }

    #[test]
    fn two_point_source_matches_perfect_signal() {
        let f = Distribution::uniform(0.0, 1.0).unwrap();
        let s = src(Distribution::discrete(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap());
        let u = data_source_utility(&s, &f).unwrap();
        let b = BinaryScenario::new(0.5, 1.0, 0.0, 1.0, f).unwrap();
        assert!((u - 0.125).abs() < 1e-14);
        assert!((u - b.signal_value()).abs() < 1e-14);
    }

    #[test]
    fn uniform_source_against_uniform_prices() {
        // ∫_0^1 (v - 1/2)^2 / 2 dv = 1/24
        let f = Distribution::uniform(0.0, 1.0).unwrap();
        let s = src(Distribution::uniform(0.0, 1.0).unwrap());
        assert!((data_source_utility(&s, &f).unwrap() - 1.0 / 24.0).abs() < 1e-10);
    }

    #[test]
    fn degenerate_law_dominates_spreads() {
        let h = src(Distribution::point_mass(0.5).unwrap());
        let g = src(Distribution::uniform(0.0, 1.0).unwrap());
        assert_eq!(sosd_check(&h, &g).unwrap(), SosdRelation::Dominates);
        assert_eq!(sosd_check(&g, &h).unwrap(), SosdRelation::DominatedBy);
    }

    #[test]
    fn narrow_uniform_dominates_wide() {
        let h = src(Distribution::uniform(0.25, 0.75).unwrap());
        let g = src(Distribution::uniform(0.0, 1.0).unwrap());
        assert_eq!(sosd_check(&h, &g).unwrap(), SosdRelation::Dominates);
        // Closed form of the gap minimum is 0 (attained at the ends).
        assert!(integrated_gap_min(h.value_law(), g.value_law()) >= -1e-15);
    }

    #[test]
    fn crossing_spreads_are_incomparable() {
        let g = src(Distribution::discrete(vec![(1.0, 0.5), (3.0, 0.5)]).unwrap());
        let h = src(Distribution::discrete(vec![(0.0, 0.1), (2.0, 0.8), (4.0, 0.1)]).unwrap());
        assert_eq!(sosd_check(&h, &g).unwrap(), SosdRelation::Incomparable);
        // Brute-force witnesses on a fine grid.
        let xs: Vec<f64> = (0..=4000).map(|i| i as f64 / 1000.0).collect();
        let gap =
            |a: &Distribution, b: &Distribution, x: f64| b.integrated_cdf(x) - a.integrated_cdf(x);
        assert!(xs
            .iter()
            .any(|x| gap(h.value_law(), g.value_law(), *x) < -0.05));
        assert!(xs
            .iter()
            .any(|x| gap(g.value_law(), h.value_law(), *x) < -0.05));
    }

    #[test]
    fn mean_mismatch_is_rejected() {
        let h = src(Distribution::point_mass(0.5).unwrap());
        let g = src(Distribution::uniform(0.0, 2.0).unwrap());
        assert!(matches!(
            sosd_check(&h, &g),
            Err(Error::MeanMismatch { .. })
        ));
    }

    #[test]
    fn bid_gain_is_convex() {
        let f = Distribution::piecewise(vec![0.0, 0.3, 1.0], vec![2.0, 4.0 / 7.0]).unwrap();
        let m = 0.45;
        let h = 1e-3;
        for i in 1..999 {
            let v = i as f64 / 1000.0;
            let d2 = bid_gain(&f, m, v + h) - 2.0 * bid_gain(&f, m, v) + bid_gain(&f, m, v - h);
            assert!(d2 >= -1e-9, "v = {v}: {d2}");
        }
    }
}
