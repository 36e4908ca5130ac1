//! Dispatches a parsed configuration to its analysis and builds the report.

use crate::binary::BinaryScenario;
use crate::budget::{self, BudgetScenario};
use crate::config::{
    BoundNode, BudgetSweepNode, CorrelatedNode, ForensicsNode, MultiSignalNode, NoPureEqNode,
    RefinementNode, RunConfig, RunError, Scenario, SignalValueNode, SosdNode, VerifyNode,
};
use crate::correlated::{self, CorrelatedScenario};
use crate::dist::Distribution;
use crate::error::Result;
use crate::forensics;
use crate::game::{self, SymmetricGameSpec, TwoBuyerSpec};
use crate::grid::{linspace, sign_changes};
use crate::mc::{self, shard_seed, SignalModel, SimScenario, Strategy, TypeValue};
use crate::multi_signal::{self, SignalBundle};
use crate::refinement::{self, DataSource, SosdRelation};
use crate::report::{Cell, Report};

/// Runs the configured analysis.
pub fn run(config: &RunConfig) -> std::result::Result<Report, RunError> {
    let (seed, trials) = (config.seed, config.trials);
    let report = match &config.scenario {
        Scenario::SignalValue(n) => signal_value(n)?,
        Scenario::Bound(n) => bound(n)?,
        Scenario::Sosd(n) => sosd(n)?,
        Scenario::BudgetSweep(n) => budget_sweep(n)?,
        Scenario::Correlated(n) => correlated_profile(n)?,
        Scenario::TwoBuyerGame(n) => two_buyer(n, trials, seed)?,
        Scenario::PurchaseEquilibria(n) => purchase_equilibria(n, trials, seed)?,
        Scenario::NoPureEq(n) => no_pure_eq(n, trials, seed)?,
        Scenario::RefinementThreshold(n) => refinement_threshold(n, trials, seed)?,
        Scenario::MultiSignal(n) => multi(n)?,
        Scenario::Forensics(n) => forensics_sweep(n)?,
        Scenario::Verify(n) => verify(n, trials, seed)?,
    };
    Ok(report)
}

fn signal_value(n: &SignalValueNode) -> Result<Report> {
    let b = &n.binary;
    let pis = n.pi_grid.clone().unwrap_or_else(|| vec![b.pi()]);
    let qs = n.q_grid.clone().unwrap_or_else(|| vec![b.q()]);
    let mut r = Report::new(vec!["pi", "q", "v_high", "v_low", "value", "bound"]);
    for &pi in &pis {
        for &q in &qs {
            let s = b.with_pi(pi)?.with_q(q)?;
            r.row(vec![
                pi.into(),
                q.into(),
                s.v_high().into(),
                s.v_low().into(),
                s.signal_value().into(),
                s.value_upper_bound().into(),
            ]);
        }
    }
    Ok(r)
}

fn bound(n: &BoundNode) -> Result<Report> {
    let b = &n.binary;
    let qs = n.q_grid.clone().unwrap_or_else(|| linspace(0.5, 1.0, 11));
    let f_bar = b.f_bar()?;
    let mut r = Report::new(vec![
        "q",
        "pi",
        "signal_value",
        "value_upper_bound",
        "quality_bound",
    ]);
    r.note("f_bar", f_bar);
    for &q in &qs {
        let s = b.with_q(q)?;
        r.row(vec![
            q.into(),
            s.pi().into(),
            s.signal_value().into(),
            s.value_upper_bound().into(),
            s.quality_bound()?.into(),
        ]);
    }
    Ok(r)
}

fn sosd(n: &SosdNode) -> Result<Report> {
    let rel = refinement::sosd_check(&n.dominant, &n.dominated)?;
    let mut r = Report::new(vec![
        "price_law",
        "utility_dominant",
        "utility_dominated",
        "ordered",
    ]);
    r.note(
        "relation",
        match rel {
            SosdRelation::Dominates => "dominates",
            SosdRelation::DominatedBy => "dominated-by",
            SosdRelation::Incomparable => "incomparable",
        },
    );
    for (i, f) in n.price_laws.iter().enumerate() {
        let uh = refinement::data_source_utility(&n.dominant, f)?;
        let ug = refinement::data_source_utility(&n.dominated, f)?;
        r.row(vec![
            i.into(),
            uh.into(),
            ug.into(),
            (ug >= uh - 1e-9).into(),
        ]);
    }
    Ok(r)
}

fn budget_sweep(n: &BudgetSweepNode) -> Result<Report> {
    let budgets = match &n.budgets {
        Some(b) => b.clone(),
        None => budget::budget_grid(&n.budget, n.points.unwrap_or(200), n.scale.unwrap_or(1.2)),
    };
    let rows = budget::sweep(&n.budget, &budgets)?;
    let mut r = Report::new(vec![
        "budget",
        "bid_no_data",
        "bid_low",
        "bid_high",
        "value_of_data",
    ]);
    let values: Vec<f64> = rows.iter().map(|x| x.value_of_data).collect();
    let steps: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    r.note(
        "ascending_pairs",
        steps.iter().filter(|d| **d > 0.0).count(),
    );
    r.note(
        "descending_pairs",
        steps.iter().filter(|d| **d < 0.0).count(),
    );
    r.note(
        "largest_descent",
        steps.iter().map(|d| -d).fold(0.0, f64::max),
    );
    for x in rows {
        r.row(vec![
            x.budget.into(),
            x.bid_no_data.into(),
            x.bid_low.into(),
            x.bid_high.into(),
            x.value_of_data.into(),
        ]);
    }
    Ok(r)
}

fn correlated_profile(n: &CorrelatedNode) -> Result<Report> {
    let sc = &n.correlated;
    let grid = n
        .pi_grid
        .clone()
        .unwrap_or_else(|| linspace(0.01, 0.99, 99));
    let p = correlated::pi_profile(sc, &grid)?;
    let mut r = Report::new(vec!["pi", "v_star", "u_nd", "u_d", "value"]);
    r.note("bid", correlated::no_data_bid(sc));
    r.note("value", correlated::correlated_value_of_data(sc));
    r.note("ipv_value", sc.pooled()?.signal_value());
    let roots: Vec<String> = correlated::eq_roots(sc)
        .iter()
        .map(|x| crate::report::fmt_g(*x))
        .collect();
    r.note("first_order_roots", roots.join(";"));
    r.note("single_peaked", p.single_peaked);
    for x in p.rows {
        r.row(vec![
            x.pi.into(),
            x.bid.into(),
            x.utility_without_data.into(),
            x.utility_with_data.into(),
            x.value.into(),
        ]);
    }
    Ok(r)
}

fn two_buyer(spec: &TwoBuyerSpec, trials: u64, seed: u64) -> Result<Report> {
    let t = game::two_buyer_payoffs(spec)?;
    let m = game::two_buyer_payoffs_mc(spec, trials, seed)?;
    let mut r = Report::new(vec![
        "player",
        "delta_1",
        "delta_2",
        "payoff",
        "mc_estimate",
        "mc_std_error",
    ]);
    let g = t.other_access_gains();
    r.note("gain_2_from_1_access_alone", g[0]);
    r.note("gain_1_from_2_access_alone", g[1]);
    r.note("gain_1_from_2_access_informed", g[2]);
    r.note("gain_2_from_1_access_informed", g[3]);
    for p in 0..2 {
        for d1 in 0..2 {
            for d2 in 0..2 {
                let s = &m[p][d1][d2];
                r.row(vec![
                    (p + 1).into(),
                    d1.into(),
                    d2.into(),
                    t.u[p][d1][d2].into(),
                    s.mean.into(),
                    s.std_error().into(),
                ]);
            }
        }
    }
    Ok(r)
}

fn purchase_equilibria(spec: &SymmetricGameSpec, trials: u64, seed: u64) -> Result<Report> {
    let e = game::find_symmetric_purchase_equilibria(spec, trials, seed)?;
    let mut r = Report::new(vec!["others_buying", "gain", "std_error"]);
    let ks: Vec<String> = e.equilibria.iter().map(|k| k.to_string()).collect();
    r.note("equilibria", ks.join(";"));
    for g in e.gains {
        r.row(vec![
            g.others_buying.into(),
            g.gain.into(),
            g.std_error.into(),
        ]);
    }
    Ok(r)
}

fn no_pure_eq(n: &NoPureEqNode, trials: u64, seed: u64) -> Result<Report> {
    let c = game::no_pure_eq_cycle(n.data_cost, n.known_fraction, trials, seed)?;
    let mut r = Report::new(vec![
        "alice_buys",
        "bella_buys",
        "alice_payoff",
        "alice_std_error",
        "bella_payoff",
        "bella_std_error",
    ]);
    for b in &c.responses {
        let key = format!(
            "{}_gain_when_other_{}",
            b.player,
            if b.other_buys { "buys" } else { "abstains" }
        );
        r.note(
            key,
            format!(
                "{} (se {}) -> {}",
                crate::report::fmt_g(b.gain_from_buying),
                crate::report::fmt_g(b.std_error),
                if b.buys { "buy" } else { "not" }
            ),
        );
    }
    r.note("mutual_best_responses", c.equilibria.len());
    r.note("cycle", c.has_cycle());
    for x in &c.cells {
        r.row(vec![
            x.alice_buys.into(),
            x.bella_buys.into(),
            x.alice_payoff.into(),
            x.alice_std_error.into(),
            x.bella_payoff.into(),
            x.bella_std_error.into(),
        ]);
    }
    Ok(r)
}

fn refinement_threshold(n: &RefinementNode, trials: u64, seed: u64) -> Result<Report> {
    let spec = &n.refinement;
    let grid = match &n.grid {
        Some(g) => g.clone(),
        None => {
            let (lo, hi) = spec.value_law().effective_support();
            let w = hi - lo;
            linspace(lo + 0.02 * w, hi - 0.02 * w, 21)
        }
    };
    let scan = game::welfare_scan(spec, &grid, trials, seed)?;
    let effects: Vec<f64> = scan.iter().map(|w| w.welfare_effect).collect();
    let mut r = Report::new(vec![
        "v_star",
        "likelihood_ratio",
        "welfare_effect",
        "std_error",
    ]);
    r.note("sign_changes", sign_changes(&effects));
    let steps = n.bisection_steps.unwrap_or(0);
    if steps > 0 {
        let bracket = scan
            .windows(2)
            .find(|w| w[0].welfare_effect < 0.0 && w[1].welfare_effect >= 0.0);
        if let Some(w) = bracket {
            let tau = game::welfare_threshold(spec, w[0].v_star, w[1].v_star, steps, trials, seed)?;
            r.note("threshold", tau);
        }
    }
    for w in scan {
        r.row(vec![
            w.v_star.into(),
            w.likelihood_ratio.into(),
            w.welfare_effect.into(),
            w.std_error.into(),
        ]);
    }
    Ok(r)
}

fn multi(n: &MultiSignalNode) -> Result<Report> {
    let m = multi_signal::marginal_values(&n.binary, n.n_max)?;
    let mut r = Report::new(vec!["n", "utility", "marginal"]);
    r.note("first_zero", m.first_zero);
    r.note("later_positive", m.later_positive);
    r.note("vanishing_tail", m.vanishing_tail);
    for x in m.rows {
        r.row(vec![x.n.into(), x.utility.into(), x.marginal.into()]);
    }
    Ok(r)
}

fn forensics_sweep(n: &ForensicsNode) -> Result<Report> {
    let spec = &n.forensics;
    let points = n.points.unwrap_or(101).max(2);
    let (lo, hi) = forensics::value_range(spec)?;
    let mut r = Report::new(vec!["alpha", "v_1", "v_2", "b_2", "b_hat", "value"]);
    r.note("min_value", lo);
    r.note("max_value", hi);
    for alpha in linspace(0.0, 1.0, points) {
        let p = forensics::build_profile(spec, alpha)?;
        r.row(vec![
            alpha.into(),
            p.v_1.into(),
            p.v_2.into(),
            p.b_2.into(),
            p.b_hat.into(),
            forensics::targeting_value(spec, alpha)?.into(),
        ]);
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// Oracle checks

/// Monte Carlo experiment `(trials, seed) -> (estimate, std_error)`.
type Estimator = Box<dyn Fn(u64, u64) -> Result<(f64, f64)>>;

/// An analytic value and the Monte Carlo experiment that should reproduce it.
struct Check {
    name: &'static str,
    analytic: f64,
    estimate: Estimator,
}

/// Seed offset for the single retry of a failed check.
const RETRY_STREAM: u64 = 0x5EED_0000;

/// Agreement rule: within three standard errors, with a tiny absolute floor
/// for deterministic estimates.
pub fn agrees(analytic: f64, estimate: f64, std_error: f64) -> bool {
    (analytic - estimate).abs() <= 3.0 * std_error + 1e-12
}

fn paired(a: SimScenario, b: SimScenario) -> Estimator {
    Box::new(move |trials, seed| {
        let r = mc::paired_difference(&a, &b, trials, seed)?;
        Ok((r.mean_difference, r.std_error))
    })
}

fn uniform(lo: f64, hi: f64) -> Distribution {
    Distribution::uniform(lo, hi).expect("valid bundled law")
}

/// Two-type world; `values` and `prices` are ordered (high, low).
fn two_type_world(
    pi: f64,
    values: (f64, f64),
    prices: (Distribution, Distribution),
    signal: SignalModel,
    strategy: Strategy,
) -> SimScenario {
    SimScenario {
        type_prior: vec![pi, 1.0 - pi],
        values_by_type: vec![TypeValue::Fixed(values.0), TypeValue::Fixed(values.1)],
        price_law_by_type: vec![prices.0, prices.1],
        signal,
        strategy,
        budget: None,
    }
}

fn checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let b = BinaryScenario::new(0.5, 1.0, 0.0, 0.75, uniform(0.0, 1.0))?;
    let world = |s: Strategy| {
        two_type_world(
            0.5,
            (1.0, 0.0),
            (uniform(0.0, 1.0), uniform(0.0, 1.0)),
            SignalModel {
                quality: 0.75,
                count: 1,
            },
            s,
        )
    };
    out.push(Check {
        name: "binary-signal-value",
        analytic: b.signal_value(),
        estimate: paired(
            world(Strategy::PosteriorBidding),
            world(Strategy::NoData {
                bid: b.mean_value(),
            }),
        ),
    });

    let g = DataSource::new(uniform(0.0, 1.0));
    let f = uniform(0.0, 1.0);
    let general = |s: Strategy| SimScenario {
        type_prior: vec![1.0],
        values_by_type: vec![TypeValue::Law(g.value_law().clone())],
        price_law_by_type: vec![f.clone()],
        signal: SignalModel::default(),
        strategy: s,
        budget: None,
    };
    out.push(Check {
        name: "refinement-utility",
        analytic: refinement::data_source_utility(&g, &f)?,
        estimate: paired(
            general(Strategy::Truthful),
            general(Strategy::NoData { bid: g.mean() }),
        ),
    });

    let half = uniform(0.0, 0.5);
    let bs = BudgetScenario::independent(0.5, 1.0, 0.25, half.clone(), 0.2)?;
    let bids = budget::solve_budget_bids(&bs)?;
    let capped = |s: Strategy| SimScenario {
        budget: Some(bs.budget()),
        ..two_type_world(
            0.5,
            (1.0, 0.25),
            (half.clone(), half.clone()),
            SignalModel {
                quality: 1.0,
                count: 1,
            },
            s,
        )
    };
    out.push(Check {
        name: "budget-value",
        analytic: budget::budget_value_of_data(&bs)?,
        estimate: paired(
            capped(Strategy::FixedBids {
                bids: vec![bids.bid_low, bids.bid_high],
            }),
            capped(Strategy::NoData {
                bid: bids.bid_no_data,
            }),
        ),
    });

    for (name, cs) in [
        (
            "correlated-interior",
            CorrelatedScenario::new(0.4, 1.0, 0.1, uniform(0.2, 1.2), uniform(0.0, 0.8))?,
        ),
        (
            "correlated-segmented",
            CorrelatedScenario::new(0.5, 1.0, 0.0, uniform(0.0, 0.5), uniform(0.5, 1.0))?,
        ),
    ] {
        let bid = correlated::no_data_bid(&cs);
        let w = |s: Strategy| {
            two_type_world(
                cs.pi(),
                (cs.v_high(), cs.v_low()),
                (cs.price_law_high().clone(), cs.price_law_low().clone()),
                SignalModel {
                    quality: 1.0,
                    count: 1,
                },
                s,
            )
        };
        out.push(Check {
            name,
            analytic: correlated::correlated_value_of_data(&cs),
            estimate: paired(
                w(Strategy::FixedBids {
                    bids: vec![cs.v_low(), cs.v_high()],
                }),
                w(Strategy::NoData { bid }),
            ),
        });
    }

    let tb = TwoBuyerSpec::new(uniform(0.0, 2.0), uniform(0.0, 1.0));
    let table = game::two_buyer_payoffs(&tb)?;
    out.push(Check {
        name: "two-buyer-both-informed",
        analytic: table.get(1, true, true),
        estimate: Box::new(move |trials, seed| {
            let m = game::two_buyer_payoffs_mc(&tb, trials, seed)?;
            Ok((m[0][1][1].mean, m[0][1][1].std_error()))
        }),
    });

    let base = BinaryScenario::new(0.3, 1.0, 0.2, 0.8, uniform(0.0, 1.0))?;
    let two = multi_signal::bundle_utility(&SignalBundle {
        base: base.clone(),
        n: 2,
    });
    let none = multi_signal::bundle_utility(&SignalBundle {
        base: base.clone(),
        n: 0,
    });
    let w = |s: Strategy| {
        two_type_world(
            0.3,
            (1.0, 0.2),
            (uniform(0.0, 1.0), uniform(0.0, 1.0)),
            SignalModel {
                quality: 0.8,
                count: 2,
            },
            s,
        )
    };
    out.push(Check {
        name: "multi-signal-pair",
        analytic: two - none,
        estimate: paired(
            w(Strategy::PosteriorBidding),
            w(Strategy::NoData {
                bid: base.mean_value(),
            }),
        ),
    });
    Ok(out)
}

/// Names of the bundled oracle checks.
pub fn check_names() -> Vec<&'static str> {
    checks()
        .map(|c| c.iter().map(|c| c.name).collect())
        .unwrap_or_default()
}

fn verify(n: &VerifyNode, trials: u64, seed: u64) -> std::result::Result<Report, RunError> {
    let all = checks()?;
    if let Some(names) = &n.checks {
        for (i, name) in names.iter().enumerate() {
            if !all.iter().any(|c| c.name == name) {
                return Err(RunError::schema(
                    format!("scenario.checks[{i}]"),
                    format!("unknown check {name:?}"),
                ));
            }
        }
    }
    let mut r = Report::new(vec![
        "check",
        "analytic",
        "estimate",
        "std_error",
        "attempts",
        "passed",
    ]);
    let mut failed = 0;
    for (i, c) in all.iter().enumerate() {
        if let Some(names) = &n.checks {
            if !names.iter().any(|x| x == c.name) {
                continue;
            }
        }
        let mut attempts = 1;
        let (mut est, mut se) = (c.estimate)(trials, shard_seed(seed, i as u64))?;
        if !agrees(c.analytic, est, se) {
            attempts = 2;
            (est, se) = (c.estimate)(trials, shard_seed(seed, RETRY_STREAM + i as u64))?;
        }
        let ok = agrees(c.analytic, est, se);
        if !ok {
            failed += 1;
        }
        r.row(vec![
            c.name.into(),
            c.analytic.into(),
            est.into(),
            se.into(),
            Cell::Int(attempts),
            ok.into(),
        ]);
    }
    r.note("failed", failed as usize);
    r.passed = failed == 0;
    Ok(r)
}
