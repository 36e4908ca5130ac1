//! One-dimensional laws used for competing bids and value estimates.
//!
//! A [`Distribution`] is built from a [`DistributionSpec`] (the serialized
//! form) and validated on construction, so every value of the type has unit
//! mass, a nondecreasing right-continuous CDF and nonnegative densities.
//!
//! Integrals follow one convention throughout the crate: an integral over the
//! [`Interval`] `(lo, hi]` counts an atom iff it lies in `(lo, hi]`. A bid `b`
//! that wins ties therefore wins exactly the prices in `Interval::up_to(b)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, invalid, Error, Result};
use crate::quad::adaptive_simpson;

/// Absolute tolerance of [`Distribution::expect_over`].
pub const QUAD_TOL: f64 = 1e-10;

/// Tolerance on total mass when validating a law.
pub const MASS_TOL: f64 = 1e-12;

/// Exponential laws are integrated numerically up to this upper-tail mass.
const EXP_TAIL: f64 = 1e-12;

/// A half-open integration range `(lo, hi]`; `lo` may be `-inf`, `hi` may be
/// `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return invalid("interval", format!("({lo}, {hi}] is not a valid range"));
        }
        Ok(Self { lo, hi })
    }

    /// `(-inf, hi]`: every price a bid of `hi` wins against.
    pub fn up_to(hi: f64) -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi,
        }
    }

    /// `(lo, hi]`, or the empty range when `hi <= lo`.
    pub fn between(lo: f64, hi: f64) -> Self {
        if hi <= lo {
            Self { lo, hi: lo }
        } else {
            Self { lo, hi }
        }
    }

    pub fn whole() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    fn contains_atom(&self, x: f64) -> bool {
        self.lo < x && x <= self.hi
    }
}

/// Serialized form of a [`Distribution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistributionSpec {
    PointMass {
        location: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Constant density `densities[i]` on `[breakpoints[i], breakpoints[i+1])`.
    Piecewise {
        breakpoints: Vec<f64>,
        densities: Vec<f64>,
    },
    Exponential {
        rate: f64,
    },
    /// `(location, probability)` pairs.
    Discrete {
        atoms: Vec<(f64, f64)>,
    },
    Mixture {
        components: Vec<DistributionSpec>,
        weights: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
struct Segments {
    breaks: Vec<f64>,
    dens: Vec<f64>,
    /// CDF at each breakpoint.
    cum: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Atoms {
    locs: Vec<f64>,
    probs: Vec<f64>,
    cum: Vec<f64>,
}

#[derive(Debug, Clone)]
enum Kind {
    Point(f64),
    Segments(Segments),
    Exponential(f64),
    Atoms(Atoms),
    Mixture(Vec<(f64, Distribution)>),
}

/// A validated one-dimensional probability law.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "DistributionSpec", into = "DistributionSpec")]
pub struct Distribution {
    spec: DistributionSpec,
    kind: Kind,
}

impl PartialEq for Distribution {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl From<Distribution> for DistributionSpec {
    fn from(d: Distribution) -> Self {
        d.spec
    }
}

impl TryFrom<DistributionSpec> for Distribution {
    type Error = Error;

    fn try_from(spec: DistributionSpec) -> Result<Self> {
        let kind = match &spec {
            DistributionSpec::PointMass { location } => {
                check_finite("point-mass location", *location)?;
                Kind::Point(*location)
            }
            DistributionSpec::Uniform { lo, hi } => {
                check_finite("uniform bound", *lo)?;
                check_finite("uniform bound", *hi)?;
                if lo >= hi {
                    return invalid("uniform", format!("lo = {lo} must be below hi = {hi}"));
                }
                Kind::Segments(Segments::new(vec![*lo, *hi], vec![1.0 / (hi - lo)])?)
            }
            DistributionSpec::Piecewise {
                breakpoints,
                densities,
            } => Kind::Segments(Segments::new(breakpoints.clone(), densities.clone())?),
            DistributionSpec::Exponential { rate } => {
                if !rate.is_finite() || *rate <= 0.0 {
                    return invalid("exponential rate", format!("{rate} must be positive"));
                }
                Kind::Exponential(*rate)
            }
            DistributionSpec::Discrete { atoms } => Kind::Atoms(Atoms::new(atoms)?),
            DistributionSpec::Mixture {
                components,
                weights,
            } => {
                if components.is_empty() || components.len() != weights.len() {
                    return invalid(
                        "mixture",
                        format!(
                            "{} components with {} weights",
                            components.len(),
                            weights.len()
                        ),
                    );
                }
                check_probabilities("mixture weights", weights)?;
                let mut parts = Vec::with_capacity(components.len());
                for (c, w) in components.iter().zip(weights) {
                    parts.push((*w, Distribution::try_from(c.clone())?));
                }
                Kind::Mixture(parts)
            }
        };
        Ok(Self { spec, kind })
    }
}

fn check_finite(what: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        invalid(what, format!("{x} is not finite"))
    }
}

fn check_probabilities(what: &'static str, probs: &[f64]) -> Result<()> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return invalid(what, "entries must be finite and nonnegative");
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        return invalid(what, format!("sum to {total}, not 1"));
    }
    Ok(())
}

impl Segments {
    fn new(breaks: Vec<f64>, dens: Vec<f64>) -> Result<Self> {
        if breaks.len() < 2 || dens.len() + 1 != breaks.len() {
            return invalid(
                "piecewise density",
                format!(
                    "{} breakpoints need {} densities, got {}",
                    breaks.len(),
                    breaks.len().saturating_sub(1),
                    dens.len()
                ),
            );
        }
        if breaks.iter().any(|b| !b.is_finite()) || breaks.windows(2).any(|w| w[0] >= w[1]) {
            return invalid(
                "piecewise density",
                "breakpoints must be finite and strictly increasing",
            );
        }
        if dens.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return invalid(
                "piecewise density",
                "densities must be finite and nonnegative",
            );
        }
        let mut cum = Vec::with_capacity(breaks.len());
        cum.push(0.0);
        for (i, d) in dens.iter().enumerate() {
            let c = cum[i] + d * (breaks[i + 1] - breaks[i]);
            cum.push(c);
        }
        let total = *cum.last().unwrap();
        if (total - 1.0).abs() > MASS_TOL {
            return invalid("piecewise density", format!("total mass {total}, not 1"));
        }
        Ok(Self { breaks, dens, cum })
    }

    fn cdf(&self, x: f64) -> f64 {
        let n = self.breaks.len();
        if x < self.breaks[0] {
            return 0.0;
        }
        if x >= self.breaks[n - 1] {
            return 1.0;
        }
        let i = self.breaks.partition_point(|&b| b <= x) - 1;
        (self.cum[i] + self.dens[i] * (x - self.breaks[i])).clamp(0.0, 1.0)
    }

    fn density(&self, x: f64) -> f64 {
        let n = self.breaks.len();
        if x < self.breaks[0] || x >= self.breaks[n - 1] {
            return 0.0;
        }
        let i = self.breaks.partition_point(|&b| b <= x) - 1;
        self.dens[i]
    }

    /// `∫ p^k f(p) dp` over `[lo, hi]` for `k` in {0, 1}.
    fn moments(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut m0 = 0.0;
        let mut m1 = 0.0;
        for (i, d) in self.dens.iter().enumerate() {
            let a = self.breaks[i].max(lo);
            let b = self.breaks[i + 1].min(hi);
            if b > a && *d > 0.0 {
                m0 += d * (b - a);
                m1 += d * 0.5 * (b - a) * (b + a);
            }
        }
        (m0, m1)
    }

    fn quantile(&self, u: f64) -> f64 {
        let n = self.cum.len();
        let j = self.cum.partition_point(|&c| c < u);
        if j == 0 {
            let i = self.dens.iter().position(|d| *d > 0.0).unwrap_or(0);
            return self.breaks[i];
        }
        if j >= n {
            let i = self.dens.iter().rposition(|d| *d > 0.0).unwrap_or(n - 2);
            return self.breaks[i + 1];
        }
        let i = j - 1;
        let x = self.breaks[i] + (u - self.cum[i]) / self.dens[i];
        x.clamp(self.breaks[i], self.breaks[i + 1])
    }

    fn support(&self) -> (f64, f64) {
        let first = self.dens.iter().position(|d| *d > 0.0).unwrap_or(0);
        let last = self
            .dens
            .iter()
            .rposition(|d| *d > 0.0)
            .unwrap_or(self.dens.len() - 1);
        (self.breaks[first], self.breaks[last + 1])
    }
}

impl Atoms {
    fn new(atoms: &[(f64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return invalid("discrete law", "needs at least one atom");
        }
        if atoms.iter().any(|(x, _)| !x.is_finite()) {
            return invalid("discrete law", "atom locations must be finite");
        }
        let probs: Vec<f64> = atoms.iter().map(|a| a.1).collect();
        check_probabilities("discrete probabilities", &probs)?;
        let mut sorted: Vec<(f64, f64)> = atoms.iter().copied().filter(|a| a.1 > 0.0).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut locs: Vec<f64> = Vec::new();
        let mut ps: Vec<f64> = Vec::new();
        for (x, p) in sorted {
            if locs.last() == Some(&x) {
                *ps.last_mut().unwrap() += p;
            } else {
                locs.push(x);
                ps.push(p);
            }
        }
        let mut cum = Vec::with_capacity(ps.len());
        let mut acc = 0.0;
        for p in &ps {
            acc += p;
            cum.push(acc);
        }
        Ok(Self {
            locs,
            probs: ps,
            cum,
        })
    }

    fn cdf(&self, x: f64) -> f64 {
        let j = self.locs.partition_point(|&l| l <= x);
        if j == 0 {
            0.0
        } else if j == self.locs.len() {
            1.0
        } else {
            self.cum[j - 1].min(1.0)
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        let j = self.cum.partition_point(|&c| c < u);
        self.locs[j.min(self.locs.len() - 1)]
    }
}

fn exp_truncation(rate: f64) -> f64 {
    -EXP_TAIL.ln() / rate
}

impl Distribution {
    pub fn from_spec(spec: DistributionSpec) -> Result<Self> {
        Self::try_from(spec)
    }

    pub fn point_mass(location: f64) -> Result<Self> {
        Self::try_from(DistributionSpec::PointMass { location })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::try_from(DistributionSpec::Uniform { lo, hi })
    }

    pub fn piecewise(breakpoints: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        Self::try_from(DistributionSpec::Piecewise {
            breakpoints,
            densities,
        })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::try_from(DistributionSpec::Exponential { rate })
    }

    pub fn discrete(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::try_from(DistributionSpec::Discrete { atoms })
    }

    pub fn mixture(components: Vec<Distribution>, weights: Vec<f64>) -> Result<Self> {
        Self::try_from(DistributionSpec::Mixture {
            components: components.into_iter().map(|c| c.spec).collect(),
            weights,
        })
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    /// `P[X <= x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        match &self.kind {
            Kind::Point(l) => {
                if x >= *l {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::Segments(s) => s.cdf(x),
            Kind::Exponential(r) => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-r * x).exp_m1()
                }
            }
            Kind::Atoms(a) => a.cdf(x),
            Kind::Mixture(parts) => parts
                .iter()
                .map(|(w, d)| w * d.cdf(x))
                .sum::<f64>()
                .clamp(0.0, 1.0),
        }
    }

    /// Density of the continuous part, right-continuous at breakpoints.
    pub fn density(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Point(_) | Kind::Atoms(_) => 0.0,
            Kind::Segments(s) => s.density(x),
            Kind::Exponential(r) => {
                if x < 0.0 {
                    0.0
                } else {
                    r * (-r * x).exp()
                }
            }
            Kind::Mixture(parts) => parts.iter().map(|(w, d)| w * d.density(x)).sum(),
        }
    }

    /// Atoms as `(location, probability)`, sorted by location.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = match &self.kind {
            Kind::Point(l) => vec![(*l, 1.0)],
            Kind::Atoms(a) => a
                .locs
                .iter()
                .copied()
                .zip(a.probs.iter().copied())
                .collect(),
            Kind::Segments(_) | Kind::Exponential(_) => Vec::new(),
            Kind::Mixture(parts) => parts
                .iter()
                .filter(|(w, _)| *w > 0.0)
                .flat_map(|(w, d)| d.atoms().into_iter().map(move |(x, p)| (x, w * p)))
                .collect(),
        };
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    pub fn has_atoms(&self) -> bool {
        !self.atoms().is_empty()
    }

    /// Points where the law is not smooth: density breakpoints and atoms.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match &self.kind {
            Kind::Point(l) => vec![*l],
            Kind::Segments(s) => s.breaks.clone(),
            Kind::Exponential(_) => vec![0.0],
            Kind::Atoms(a) => a.locs.clone(),
            Kind::Mixture(parts) => parts.iter().flat_map(|(_, d)| d.breakpoints()).collect(),
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Closed hull of the support; the upper end may be `+inf`.
    pub fn support(&self) -> (f64, f64) {
        match &self.kind {
            Kind::Point(l) => (*l, *l),
            Kind::Segments(s) => s.support(),
            Kind::Exponential(_) => (0.0, f64::INFINITY),
            Kind::Atoms(a) => (a.locs[0], *a.locs.last().unwrap()),
            Kind::Mixture(parts) => parts
                .iter()
                .filter(|(w, _)| *w > 0.0)
                .map(|(_, d)| d.support())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |acc, s| {
                    (acc.0.min(s.0), acc.1.max(s.1))
                }),
        }
    }

    /// Finite range holding all but `1e-12` of the mass.
    pub fn effective_support(&self) -> (f64, f64) {
        let (lo, hi) = self.support();
        if hi.is_finite() {
            (lo, hi)
        } else {
            (lo, self.quantile(1.0 - EXP_TAIL))
        }
    }

    pub fn mean(&self) -> f64 {
        self.partial_mean(Interval::whole())
    }

    /// `P[X in (lo, hi]]`.
    pub fn mass(&self, iv: Interval) -> f64 {
        if iv.is_empty() {
            return 0.0;
        }
        let hi = if iv.hi == f64::INFINITY {
            1.0
        } else {
            self.cdf(iv.hi)
        };
        let lo = if iv.lo == f64::NEG_INFINITY {
            0.0
        } else {
            self.cdf(iv.lo)
        };
        (hi - lo).max(0.0)
    }

    /// `∫_(lo, hi] p dF(p)`, in closed form.
    pub fn partial_mean(&self, iv: Interval) -> f64 {
        self.moments(iv).1
    }

    /// `∫_(lo, hi] (a + b p) dF(p)`, in closed form.
    pub fn linear(&self, iv: Interval, a: f64, b: f64) -> f64 {
        let (m0, m1) = self.moments(iv);
        let mut out = 0.0;
        if a != 0.0 {
            out += a * m0;
        }
        if b != 0.0 {
            out += b * m1;
        }
        out
    }

    fn moments(&self, iv: Interval) -> (f64, f64) {
        if iv.is_empty() {
            return (0.0, 0.0);
        }
        match &self.kind {
            Kind::Point(l) => {
                if iv.contains_atom(*l) {
                    (1.0, *l)
                } else {
                    (0.0, 0.0)
                }
            }
            Kind::Segments(s) => s.moments(iv.lo, iv.hi),
            Kind::Exponential(r) => {
                let a = iv.lo.max(0.0);
                let b = iv.hi;
                if b <= a {
                    return (0.0, 0.0);
                }
                let ea = (-r * a).exp();
                let eb = if b.is_finite() { (-r * b).exp() } else { 0.0 };
                let m0 = ea - eb;
                let tail = |x: f64, e: f64| if e == 0.0 { 0.0 } else { (x + 1.0 / r) * e };
                let m1 = tail(a, ea) - tail(b, eb);
                (m0, m1)
            }
            Kind::Atoms(a) => a
                .locs
                .iter()
                .zip(&a.probs)
                .filter(|(x, _)| iv.contains_atom(**x))
                .fold((0.0, 0.0), |acc, (x, p)| (acc.0 + p, acc.1 + p * x)),
            Kind::Mixture(parts) => parts.iter().fold((0.0, 0.0), |acc, (w, d)| {
                let (m0, m1) = d.moments(iv);
                (acc.0 + w * m0, acc.1 + w * m1)
            }),
        }
    }

    /// `∫_{-inf}^x F(t) dt = E[(x - X)^+]`.
    pub fn integrated_cdf(&self, x: f64) -> f64 {
        let iv = Interval::up_to(x);
        let (m0, m1) = self.moments(iv);
        (x * m0 - m1).max(0.0)
    }

    /// `∫_(lo, hi] integrand(p) dF(p)` by adaptive Simpson on each smooth
    /// piece plus the atom contributions.
    pub fn expect_over<G: Fn(f64) -> f64>(&self, iv: Interval, integrand: G) -> Result<f64> {
        self.expect_over_split(iv, integrand, &[])
    }

    /// As [`expect_over`](Self::expect_over), additionally splitting the
    /// quadrature at `splits` (kinks of the integrand).
    pub fn expect_over_split<G: Fn(f64) -> f64>(
        &self,
        iv: Interval,
        integrand: G,
        splits: &[f64],
    ) -> Result<f64> {
        if iv.is_empty() {
            return Ok(0.0);
        }
        self.expect_inner(iv, &integrand, splits, QUAD_TOL)
    }

    fn expect_inner<G: Fn(f64) -> f64>(
        &self,
        iv: Interval,
        g: &G,
        splits: &[f64],
        tol: f64,
    ) -> Result<f64> {
        let atom = |x: f64, p: f64| -> Result<f64> {
            let y = g(x);
            if y.is_finite() {
                Ok(p * y)
            } else {
                Err(Error::NonFiniteIntegrand { at: x })
            }
        };
        match &self.kind {
            Kind::Point(l) => {
                if iv.contains_atom(*l) {
                    atom(*l, 1.0)
                } else {
                    Ok(0.0)
                }
            }
            Kind::Atoms(a) => {
                let mut total = 0.0;
                for (x, p) in a.locs.iter().zip(&a.probs) {
                    if iv.contains_atom(*x) {
                        total += atom(*x, *p)?;
                    }
                }
                Ok(total)
            }
            Kind::Segments(s) => {
                let mut pieces = Vec::new();
                for (i, d) in s.dens.iter().enumerate() {
                    if *d == 0.0 {
                        continue;
                    }
                    let a = s.breaks[i].max(iv.lo);
                    let b = s.breaks[i + 1].min(iv.hi);
                    if b > a {
                        push_split(&mut pieces, a, b, *d, splits);
                    }
                }
                let per = tol / pieces.len().max(1) as f64;
                let mut total = 0.0;
                for (a, b, d) in pieces {
                    total += d * adaptive_simpson(g, a, b, per / d)?;
                }
                Ok(total)
            }
            Kind::Exponential(r) => {
                let r = *r;
                let a = iv.lo.max(0.0);
                let b = iv.hi.min(exp_truncation(r));
                if b <= a {
                    return Ok(0.0);
                }
                let mut cuts: Vec<f64> = (0..)
                    .map(|k| k as f64 / r)
                    .take_while(|x| *x < b)
                    .filter(|x| *x > a)
                    .collect();
                cuts.extend(splits.iter().copied().filter(|x| *x > a && *x < b));
                cuts.push(a);
                cuts.push(b);
                cuts.sort_by(f64::total_cmp);
                cuts.dedup();
                let per = tol / cuts.len() as f64;
                let h = |p: f64| g(p) * r * (-r * p).exp();
                let mut total = 0.0;
                for w in cuts.windows(2) {
                    total += adaptive_simpson(&h, w[0], w[1], per)?;
                }
                Ok(total)
            }
            Kind::Mixture(parts) => {
                let mut total = 0.0;
                for (w, d) in parts {
                    if *w > 0.0 {
                        total += w * d.expect_inner(iv, g, splits, tol)?;
                    }
                }
                Ok(total)
            }
        }
    }

    /// Generalized inverse CDF `inf{x : F(x) >= u}` for `u` in `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match &self.kind {
            Kind::Point(l) => *l,
            Kind::Segments(s) => s.quantile(u),
            Kind::Exponential(r) => -(-u).ln_1p() / r,
            Kind::Atoms(a) => a.quantile(u),
            Kind::Mixture(parts) => {
                let qs = parts
                    .iter()
                    .filter(|(w, _)| *w > 0.0)
                    .map(|(_, d)| d.quantile(u));
                let (mut lo, mut hi) = qs.fold((f64::INFINITY, f64::NEG_INFINITY), |acc, q| {
                    (acc.0.min(q), acc.1.max(q))
                });
                if self.cdf(lo) >= u {
                    return lo;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.cdf(mid) >= u {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
        }
    }

    /// One inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    /// Essential supremum of the density over `[lo, hi]`. Fails if an atom
    /// lies in the closed range.
    pub fn density_sup(&self, lo: f64, hi: f64) -> Result<f64> {
        check_range("density range", lo, f64::MIN, hi)?;
        if let Some((x, _)) = self.atoms().into_iter().find(|(x, _)| *x >= lo && *x <= hi) {
            return Err(Error::AtomInRange { at: x, lo, hi });
        }
        if lo == hi {
            return Ok(self.density(lo));
        }
        // Every built-in density is nonincreasing between breakpoints, so the
        // supremum is attained as a right limit at one of them.
        let sup = std::iter::once(lo)
            .chain(
                self.breakpoints()
                    .into_iter()
                    .filter(|b| *b > lo && *b < hi),
            )
            .map(|x| self.density(x))
            .fold(0.0, f64::max);
        Ok(sup)
    }
}

fn push_split(out: &mut Vec<(f64, f64, f64)>, a: f64, b: f64, d: f64, splits: &[f64]) {
    let mut start = a;
    let mut inner: Vec<f64> = splits
        .iter()
        .copied()
        .filter(|x| *x > a && *x < b)
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    for x in inner {
        out.push((start, x, d));
        start = x;
    }
    out.push((start, b, d));
}
