//! Acceptance criteria, one test each. Every test prints a single
//! `criterion N: PASS|FAIL` line before asserting, so the full set of
//! verdicts shows up with `--nocapture` even when some fail.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use targeting_value::binary::quality_value_bound;
use targeting_value::budget::{self, BudgetScenario};
use targeting_value::config::parse_config;
use targeting_value::correlated::{self, CorrelatedScenario};
use targeting_value::error::Error;
use targeting_value::forensics::{self, ForensicsSpec};
use targeting_value::game::{self, Player, RefinementSpec, SymmetricGameSpec, TwoBuyerSpec};
use targeting_value::grid::{linspace, sign_changes};
use targeting_value::mc::{self, SignalModel, SimScenario, Strategy, TypeValue};
use targeting_value::multi_signal::{self, posterior_after_counts};
use targeting_value::refinement::{self, DataSource, SosdRelation};
use targeting_value::runner;
use targeting_value::{BinaryScenario, Distribution};

const TRIALS: u64 = 1_000_000;

fn verdict(n: u32, what: &str, ok: bool, detail: String) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("criterion {n}: {tag} {what} ({detail})");
    assert!(ok, "criterion {n} failed: {what} ({detail})");
}

fn uniform(lo: f64, hi: f64) -> Distribution {
    Distribution::uniform(lo, hi).unwrap()
}

/// A price law on `[lo, hi]`: uniform, or piecewise with 2-4 random pieces.
fn random_price_law(rng: &mut ChaCha8Rng) -> Distribution {
    let lo = rng.random_range(0.0..0.5);
    let hi = lo + rng.random_range(0.3..1.5);
    if rng.random_bool(0.5) {
        return uniform(lo, hi);
    }
    let pieces = rng.random_range(2..=4);
    let mut cuts: Vec<f64> = (0..pieces - 1).map(|_| rng.random_range(lo..hi)).collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let weights: Vec<f64> = (1..cuts.len())
        .map(|_| rng.random_range(0.1..1.0))
        .collect();
    let mass: f64 = weights
        .iter()
        .zip(cuts.windows(2))
        .map(|(w, c)| w * (c[1] - c[0]))
        .sum();
    let densities = weights.iter().map(|w| w / mass).collect();
    Distribution::piecewise(cuts, densities).unwrap()
}

fn random_binary(rng: &mut ChaCha8Rng) -> BinaryScenario {
    let pi = rng.random_range(0.05..0.95);
    let q = rng.random_range(0.5..=1.0);
    let v_low = rng.random_range(0.0..1.0);
    let v_high = v_low + rng.random_range(0.01..1.5);
    BinaryScenario::new(pi, v_high, v_low, q, random_price_law(rng)).unwrap()
}

/// |analytic - estimate| within three standard errors, with a floor for
/// exactly deterministic estimates.
fn within(analytic: f64, estimate: f64, se: f64) -> bool {
    (analytic - estimate).abs() <= 3.0 * se + 1e-12
}

#[test]
fn c01_posterior_exactness() {
    let b = BinaryScenario::new(0.5, 1.0, 0.0, 0.75, uniform(0.0, 1.0)).unwrap();
    let one = b.posterior().pi_given_h;
    let two = posterior_after_counts(0.5, 0.75, 2, 2);
    let ok = (one - 0.75).abs() <= 1e-14 && (two - 0.9).abs() <= 1e-14;
    verdict(
        1,
        "posterior after one and two high signals",
        ok,
        format!("{one}, {two}"),
    );
}

#[test]
fn c02_signal_value_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut retries = 0;
    let mut failures = Vec::new();
    for i in 0..100u64 {
        let s = random_binary(&mut rng);
        let world = |strategy| SimScenario {
            type_prior: vec![s.pi(), 1.0 - s.pi()],
            values_by_type: vec![TypeValue::Fixed(s.v_high()), TypeValue::Fixed(s.v_low())],
            price_law_by_type: vec![s.price_law().clone(), s.price_law().clone()],
            signal: SignalModel {
                quality: s.q(),
                count: 1,
            },
            strategy,
            budget: None,
        };
        let with = world(Strategy::PosteriorBidding);
        let without = world(Strategy::NoData {
            bid: s.mean_value(),
        });
        let analytic = s.signal_value();
        let r = mc::paired_difference(&with, &without, TRIALS, 1000 + i).unwrap();
        if within(analytic, r.mean_difference, r.std_error) {
            continue;
        }
        retries += 1;
        let r = mc::paired_difference(&with, &without, TRIALS, 5000 + i).unwrap();
        if !within(analytic, r.mean_difference, r.std_error) {
            failures.push((i, analytic, r.mean_difference, r.std_error));
        }
    }
    verdict(
        2,
        "signal value agrees with the paired oracle on 100 scenarios",
        failures.is_empty() && retries <= 2,
        format!("retries {retries}, failures {failures:?}"),
    );
}

#[test]
fn c03_value_below_upper_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let s = random_binary(&mut rng);
        worst = worst.min(s.value_upper_bound() - s.signal_value());
    }
    verdict(
        3,
        "signal value never exceeds its upper bound",
        worst >= -1e-9,
        format!("min slack {worst:e}"),
    );
}

/// An equal-mean pair (less risky, riskier) built by spreading mass.
fn spread_pair(rng: &mut ChaCha8Rng) -> (DataSource, DataSource) {
    match rng.random_range(0..3) {
        0 => {
            // Uniform against the two-point law on its endpoints.
            let lo = rng.random_range(0.0..1.0);
            let hi = lo + rng.random_range(0.1..1.0);
            let spread = Distribution::discrete(vec![(lo, 0.5), (hi, 0.5)]).unwrap();
            (DataSource::new(uniform(lo, hi)), DataSource::new(spread))
        }
        1 => {
            // Each atom split symmetrically.
            let k = rng.random_range(1..=4);
            let atoms: Vec<(f64, f64)> = (0..k)
                .map(|_| (rng.random_range(0.5..1.5), 1.0 / k as f64))
                .collect();
            let mut spread = Vec::new();
            for &(x, p) in &atoms {
                let d = rng.random_range(0.0..0.5);
                spread.push((x - d, p / 2.0));
                spread.push((x + d, p / 2.0));
            }
            (
                DataSource::new(Distribution::discrete(atoms).unwrap()),
                DataSource::new(Distribution::discrete(spread).unwrap()),
            )
        }
        _ => {
            // Narrow uniform inside a wide one around the same center.
            let c = rng.random_range(0.5..1.0);
            let w = rng.random_range(0.05..0.5);
            let narrow = rng.random_range(0.0..w);
            let inner = if narrow == 0.0 {
                Distribution::point_mass(c).unwrap()
            } else {
                uniform(c - narrow, c + narrow)
            };
            (
                DataSource::new(inner),
                DataSource::new(uniform(c - w, c + w)),
            )
        }
    }
}

#[test]
fn c04_sosd_orders_utilities() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut pairs, mut attempts, mut worst) = (0, 0, f64::INFINITY);
    while pairs < 200 && attempts < 1000 {
        attempts += 1;
        let (h, g) = spread_pair(&mut rng);
        if refinement::sosd_check(&h, &g).unwrap() != SosdRelation::Dominates {
            continue;
        }
        pairs += 1;
        for _ in 0..5 {
            let f = random_price_law(&mut rng);
            let ug = refinement::data_source_utility(&g, &f).unwrap();
            let uh = refinement::data_source_utility(&h, &f).unwrap();
            worst = worst.min(ug - uh);
        }
    }
    verdict(
        4,
        "riskier source is worth at least as much on 200 dominated pairs",
        pairs == 200 && worst >= -1e-9,
        format!("pairs {pairs} of {attempts}, min u_G - u_H {worst:e}"),
    );
}

#[test]
fn c05_budget_non_monotonicity() {
    let law = Distribution::piecewise(vec![0.0, 0.5], vec![2.0]).unwrap();
    let sc = BudgetScenario::independent(0.5, 1.0, 0.25, law, 0.0).unwrap();
    let budgets = budget::budget_grid(&sc, 200, 1.2);
    let rows = budget::sweep(&sc, &budgets).unwrap();
    let steps: Vec<f64> = rows
        .windows(2)
        .map(|w| w[1].value_of_data - w[0].value_of_data)
        .collect();
    let up = steps.iter().filter(|d| **d > 0.0).count();
    let descent = steps.iter().map(|d| -d).fold(0.0, f64::max);
    verdict(
        5,
        "budget scan rises and falls",
        budgets.len() == 200 && up > 0 && descent > 1e-6,
        format!("ascending pairs {up}, largest descent {descent:e}"),
    );
}

#[test]
fn c06_correlated_examples() {
    let first =
        CorrelatedScenario::new(0.5, 1.0, 0.0, uniform(0.0, 0.5), uniform(0.5, 1.0)).unwrap();
    let bid = correlated::no_data_bid(&first);
    let v1 = correlated::correlated_value_of_data(&first);
    let second =
        CorrelatedScenario::new(0.5, 1.0, 0.0, uniform(0.5, 1.0), uniform(0.0, 0.5)).unwrap();
    let v2 = correlated::correlated_value_of_data(&second);
    let ipv = second.pooled().unwrap().signal_value();
    let checks = [
        ("first value 0", v1.abs() <= 1e-9),
        ("first bid 1/2", (bid - 0.5).abs() <= 1e-6),
        ("second value 1/4", (v2 - 0.25).abs() <= 1e-9),
        ("second IPV value 1/8", (ipv - 0.125).abs() <= 1e-9),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    verdict(
        6,
        "correlated examples",
        failed.is_empty(),
        format!("value {v1:e} at bid {bid}; value {v2} vs IPV {ipv}; failed {failed:?}"),
    );
}

/// A full-support-from-zero value law with mean in a useful range.
fn random_value_law(rng: &mut ChaCha8Rng) -> Distribution {
    match rng.random_range(0..3) {
        0 => uniform(0.0, rng.random_range(0.5..3.0)),
        1 => Distribution::exponential(rng.random_range(0.5..3.0)).unwrap(),
        _ => {
            let hi = rng.random_range(0.5..3.0);
            let w: Vec<f64> = (0..3).map(|_| rng.random_range(0.2..1.0)).collect();
            let mass: f64 = w.iter().sum::<f64>() * hi / 3.0;
            Distribution::piecewise(
                vec![0.0, hi / 3.0, 2.0 * hi / 3.0, hi],
                w.iter().map(|x| x / mass).collect(),
            )
            .unwrap()
        }
    }
}

#[test]
fn c07_other_buyer_access_helps() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut specs, mut worst) = (0, f64::INFINITY);
    while specs < 100 {
        let (a, b) = (random_value_law(&mut rng), random_value_law(&mut rng));
        let spec = TwoBuyerSpec::new(a, b);
        let (m1, m2) = (spec.value_law_1.mean(), spec.value_law_2.mean());
        // Buyer 2 must have some chance of beating buyer 1's mean.
        if m1 <= m2 + 0.05 || spec.value_law_2.support().1 <= m1 {
            continue;
        }
        specs += 1;
        let gains = game::two_buyer_payoffs(&spec).unwrap().other_access_gains();
        worst = gains.iter().copied().fold(worst, f64::min);
    }
    verdict(
        7,
        "each buyer gains when the other gets access, on 100 specs",
        worst > 1e-9,
        format!("smallest margin {worst:e}"),
    );
}

#[test]
fn c08_discrete_examples() {
    let a = [(4.0, 0.5), (8.0, 0.5)];
    let b = [(2.0, 0.5), (5.0, 0.5)];
    let c = [(0.0, 0.5), (8.0, 0.5)];
    let got = [
        game::discrete_value_of_data(&a, &b, Player::Two, false).unwrap(),
        game::discrete_value_of_data(&a, &b, Player::Two, true).unwrap(),
        game::discrete_value_of_data(&c, &b, Player::Two, false).unwrap(),
        game::discrete_value_of_data(&c, &b, Player::Two, true).unwrap(),
    ];
    verdict(
        8,
        "discrete values of data",
        got == [0.0, 0.25, 0.5, 0.0],
        format!("{got:?}"),
    );
}

#[test]
fn c09_no_pure_equilibrium() {
    let c = game::no_pure_eq_cycle(0.01, 0.01, TRIALS, 9).unwrap();
    let resolved = c
        .responses
        .iter()
        .all(|r| r.std_error == 0.0 || r.gain_from_buying.abs() >= 3.0 * r.std_error);
    verdict(
        9,
        "purchase game has no mutual best response",
        resolved && c.equilibria.is_empty() && c.has_cycle(),
        format!(
            "gains {:?}",
            c.responses
                .iter()
                .map(|r| (r.gain_from_buying, r.std_error))
                .collect::<Vec<_>>()
        ),
    );
}

fn random_symmetric(rng: &mut ChaCha8Rng) -> SymmetricGameSpec {
    let c = rng.random_range(0.3..0.7);
    let w = rng.random_range(0.05..0.3);
    let without_data_law = if rng.random_bool(0.5) {
        Distribution::point_mass(c).unwrap()
    } else {
        uniform(c - w / 2.0, c + w / 2.0)
    };
    SymmetricGameSpec {
        n: rng.random_range(2..=6),
        with_data_law: uniform(c - w, c + w),
        without_data_law,
        cost: rng.random_range(0.0..0.05),
    }
}

#[test]
fn c10_symmetric_equilibria_exist() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut bad = Vec::new();
    for i in 0..20u64 {
        let spec = random_symmetric(&mut rng);
        let mut trials = 200_000;
        let found = loop {
            match game::find_symmetric_purchase_equilibria(&spec, trials, 100 + i) {
                Ok(r) => break Some(r.equilibria),
                Err(Error::InconclusiveAtResolution { .. }) if trials < 12_800_000 => trials *= 4,
                Err(_) => break None,
            }
        };
        if found.as_ref().is_none_or(|e| e.is_empty()) {
            bad.push((i, found));
        }
    }
    verdict(
        10,
        "every symmetric purchase game has a pure equilibrium",
        bad.is_empty(),
        format!("{bad:?}"),
    );
}

#[test]
fn c11_multi_signal_non_monotone() {
    let base =
        BinaryScenario::new(0.5, 1.0, 0.0, 0.75, Distribution::point_mass(0.8).unwrap()).unwrap();
    let r = multi_signal::marginal_values(&base, 60).unwrap();
    let (m1, m2, m60) = (r.rows[1].marginal, r.rows[2].marginal, r.rows[60].marginal);
    let checks = [
        ("m(1) = 0", m1 == 0.0),
        ("m(2) = 1/32", (m2 - 1.0 / 32.0).abs() <= 1e-15),
        ("m(60) < 1e-6", m60 < 1e-6),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    verdict(
        11,
        "marginal value of signals",
        failed.is_empty(),
        format!("m(1) {m1}, m(2) {m2}, m(60) {m60:e}; failed {failed:?}"),
    );
}

#[test]
fn c12_quality_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let s = random_binary(&mut rng);
        worst = worst.min(s.quality_bound().unwrap() - s.signal_value());
    }
    let at_half = quality_value_bound(0.5, 1.0, 0.0, 1.0);
    let at_one = quality_value_bound(1.0, 1.0, 0.0, 1.0);
    verdict(
        12,
        "quality bound",
        worst >= -1e-9 && at_half == 0.0 && at_one == 5.0 / 24.0,
        format!("min slack {worst:e}, bound(1/2) {at_half}, bound(1) {at_one}"),
    );
}

/// Value of segment data when the advertiser has no finer targeting,
/// integrated directly for a uniform(0,1) price law.
fn forensics_baseline(p: (f64, f64, f64), b12: f64, b3: f64) -> f64 {
    let b = (p.0 + p.1) * b12 + p.2 * b3;
    (p.0 + p.1) * (b12 - b).powi(2) / 2.0 + p.2 * (b - b3).powi(2) / 2.0
}

#[test]
fn c13_forensics_sweep() {
    let third = 1.0 / 3.0;
    let spec = ForensicsSpec::new(
        third,
        third,
        1.0 - 2.0 * third,
        2.0 / 3.0,
        third,
        uniform(0.0, 1.0),
    )
    .unwrap();
    let v0 = forensics::targeting_value(&spec, 0.0).unwrap();
    let v1 = forensics::targeting_value(&spec, 1.0).unwrap();
    let direct = forensics_baseline(spec.pi(), spec.b_12(), spec.b_3());
    let mut drift: f64 = 0.0;
    let mut values = Vec::new();
    for a in linspace(0.0, 1.0, 101) {
        let p = forensics::build_profile(&spec, a).unwrap();
        drift = drift.max((forensics::implied_average_bid(&spec, &p) - spec.b_12()).abs());
        values.push(forensics::targeting_value(&spec, a).unwrap());
    }
    values.sort_by(f64::total_cmp);
    let gap = values.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let covers = values[0].abs() <= 1e-12 && (values[100] - v0).abs() <= 1e-12 && gap < v0 / 50.0;
    verdict(
        13,
        "forensics sweep spans zero to the full value",
        v1.abs() <= 1e-12 && (v0 - direct).abs() <= 1e-10 && drift <= 1e-12 && covers,
        format!("V(0) {v0} vs {direct}, V(1) {v1:e}, drift {drift:e}, max gap {gap:e}"),
    );
}

#[test]
fn c14_refinement_threshold() {
    let spec = RefinementSpec::with_defaults(3, uniform(0.0, 1.0), 0.5).unwrap();
    let half = game::likelihood_ratio(&spec);
    let grid: Vec<f64> = (0..21).map(|i| 0.02 + 0.048 * i as f64).collect();
    let scan = game::welfare_scan(&spec, &grid, TRIALS, 14).unwrap();
    let effects: Vec<f64> = scan.iter().map(|w| w.welfare_effect).collect();
    let changes = sign_changes(&effects);
    verdict(
        14,
        "refinement welfare changes sign once",
        half == 1.0 && changes == 1 && effects[0] < 0.0 && effects[20] > 0.0,
        format!("ratio at 1/2 {half}, sign changes {changes}"),
    );
}

#[test]
fn c15_verify_is_reproducible() {
    let config = parse_config(r#"{"analysis": "verify", "seed": 15, "trials": 1000000}"#).unwrap();
    let first = runner::run(&config)
        .unwrap()
        .render(&config, config.output.format);
    let second = runner::run(&config)
        .unwrap()
        .render(&config, config.output.format);
    let lines = first.lines().filter(|l| !l.starts_with('#')).count() - 1;
    verdict(
        15,
        "verify report is byte-identical across runs",
        first == second && lines == runner::check_names().len(),
        format!("{} bytes, {lines} checks", first.len()),
    );
}
