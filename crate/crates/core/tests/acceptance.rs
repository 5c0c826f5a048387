//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion with its
//! runtime and limit, then fails if any criterion failed.
//!
//! `cargo test -p cylevel --test acceptance -- --nocapture`

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::props::*;
use common::*;
use cylevel::elimination::{eliminate_exact, identify, twist_descent, Conclusion};
use cylevel::residual::{
    enumerate_characters, fits_ramified_at, reduce_traces, reducible_fits, twist_residues,
};
use cylevel::serre_bound;
use cylevel::sturm_dim::{dim_cusp, dim_new, gamma0_data};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Check = Result<String, String>;
type Criterion = (u32, &'static str, Duration, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn c1_bounds() -> Check {
    let got: Vec<i64> = [vec![2], vec![5], vec![2, 5]]
        .into_iter()
        .map(|s| serre_bound(s).map(|b| b.value()).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    ensure(got == [256, 25, 6400], format!("bounds {got:?}"))?;
    Ok(format!(
        "B({{2}})={} B({{5}})={} B({{2,5}})={}",
        got[0], got[1], got[2]
    ))
}

fn c2_x1() -> Check {
    let report = identify(&w4(), None, &traces("x1.traces")).map_err(|e| e.to_string())?;
    ensure(
        report.conclusion == Conclusion::UniqueLevel(8),
        report.conclusion.machine_line(),
    )?;
    Ok(report.conclusion.machine_line())
}

fn c3_twisted_residues() -> Check {
    let rt = reduce_traces(&traces("x3.traces"), 5).map_err(|e| e.to_string())?;
    let twisted = twist_residues(&rt, 1);
    let printed: [(i64, i64); 6] = [(3, -1), (7, -2), (11, -3), (13, -1), (17, -2), (19, 0)];
    let primes: Vec<i64> = twisted.residues.keys().copied().collect();
    ensure(
        primes == [3, 7, 11, 13, 17, 19],
        format!("primes {primes:?}"),
    )?;
    for (p, v) in printed {
        ensure(
            twisted.residues[&p] == v.rem_euclid(5),
            format!("p={p}: {} vs {v} (mod 5)", twisted.residues[&p]),
        )?;
    }
    let shown: Vec<i64> = twisted.balanced().into_values().collect();
    Ok(format!(
        "residues {shown:?} agree mod 5 with [-1, -2, -3, -1, -2, 0]"
    ))
}

fn c4_x3_case_b() -> Check {
    let levels: BTreeSet<i64> = (1..=200).filter(|d| 200 % d == 0).collect();
    let report = eliminate_exact(&w4(), &traces("x3.traces"), &levels, 4);
    ensure(
        report.conclusion == Conclusion::UniqueLevel(50),
        report.conclusion.machine_line(),
    )?;
    Ok(format!(
        "{} via {}",
        report.conclusion.machine_line(),
        report.survivors()[0].label
    ))
}

fn c5_x3_case_a() -> Check {
    let td = traces("x3.traces");
    let bt = serre_bound([2, 5]).map_err(|e| e.to_string())?;
    let subset = w2_subset();
    let report = twist_descent(&subset, &td, &bt, 4, 5).map_err(|e| e.to_string())?;
    ensure(
        report.verdicts.len() == subset.records.len(),
        format!(
            "{} verdicts for {} records",
            report.verdicts.len(),
            subset.records.len()
        ),
    )?;
    let Conclusion::Conditional { gaps, inner } = &report.conclusion else {
        return Err(format!(
            "subset run not conditional: {:?}",
            report.conclusion
        ));
    };
    ensure(
        **inner == Conclusion::TwoPowerExcluded(4),
        format!("inner {inner:?}"),
    )?;
    ensure(gaps == &[(3200, 2), (6400, 2)], format!("gaps {gaps:?}"))?;

    let full = twist_descent(&w2(), &td, &bt, 4, 5).map_err(|e| e.to_string())?;
    ensure(
        full.conclusion == Conclusion::TwoPowerExcluded(4),
        format!("full run {:?}", full.conclusion),
    )?;
    Ok(format!(
        "subset: {} records, conditional on {} levels; full data: {} records, {}",
        subset.records.len(),
        gaps.len(),
        full.verdicts.len(),
        full.conclusion.machine_line()
    ))
}

fn p1_size(n: i64) -> i64 {
    use num_integer::Integer;
    let units = (1..=n).filter(|u| u.gcd(&n) == 1).count() as i64;
    let pairs = (0..n)
        .flat_map(|c| (0..n).map(move |d| (c, d)))
        .filter(|(c, d)| c.gcd(d).gcd(&n) == 1)
        .count() as i64;
    pairs / units
}

fn c6_dimensions() -> Check {
    let e = |r: cylevel::Result<i64>| r.map_err(|e| e.to_string());
    let g50 = gamma0_data(50).map_err(|e| e.to_string())?;
    ensure(g50.genus == 2, format!("g(50) = {}", g50.genus))?;
    ensure(
        g50.mu == p1_size(50),
        "index of 50 disagrees with P^1 count",
    )?;
    for n in [1, 4, 8] {
        ensure(
            gamma0_data(n).map_err(|e| e.to_string())?.mu == p1_size(n),
            format!("index of {n} disagrees with P^1 count"),
        )?;
    }
    let vals = [
        e(dim_cusp(8, 4))?,
        e(dim_new(8, 4))?,
        e(dim_cusp(1, 4))?,
        e(dim_cusp(4, 4))?,
    ];
    ensure(vals == [1, 1, 0, 0], format!("dims {vals:?}"))?;
    Ok("g(50)=2 S4(8)=1 S4new(8)=1 S4(1)=0 S4(4)=0".into())
}

fn run_property<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: 100,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))
}

fn c7_properties() -> Check {
    run_property("divisor count", 1i64..10_000_000, divisor_count_identity)?;
    run_property(
        "ramanujan corruption",
        (any::<usize>(), any::<usize>(), 1i64..10_000, any::<bool>()),
        |(a, b, c, d)| ramanujan_corruption_detected(a, b, c, d),
    )?;
    run_property(
        "twist additivity and period",
        (residues_strategy(), -20i64..20, -20i64..20),
        |(rt, a, b)| twist_additive_and_periodic(&rt, a, b),
    )?;
    run_property(
        "fit swap closure and verification",
        (prop::collection::vec(0i64..5, 6), 0usize..32, 0i64..4),
        |(values, k, i)| {
            fits_closed_and_verified(&values, None)?;
            fits_closed_and_verified(&[], Some((k, i)))
        },
    )?;
    run_property(
        "elimination self-consistency",
        (any::<usize>(), prop::collection::vec(any::<bool>(), 1..16)),
        |(pick, keep)| elimination_self_consistent(pick, &keep),
    )?;
    run_property(
        "elimination monotonicity",
        (
            any::<usize>(),
            prop::collection::vec(any::<bool>(), 1..16),
            prop::collection::vec(any::<bool>(), 1..16),
            any::<usize>(),
        ),
        |(pick, keep, extra, nudge)| elimination_monotone(pick, &keep, &extra, nudge),
    )?;
    run_property(
        "character counts",
        (2i64..400, prop::sample::select(vec![2i64, 3, 5, 7, 11, 13])),
        |(m, ell)| character_count(m, ell),
    )?;
    let n16 = enumerate_characters(16, 5)
        .map_err(|e| e.to_string())?
        .len();
    let n80 = enumerate_characters(80, 5)
        .map_err(|e| e.to_string())?
        .len();
    ensure(n16 == 8 && n80 == 32, format!("counts {n16}, {n80}"))?;
    Ok("7 suites x 100 cases; 8 characters mod 16, 32 mod 80".into())
}

fn c8_unramified_at_2() -> Check {
    let td = traces("x3.traces");
    let rt = reduce_traces(&td, 5).map_err(|e| e.to_string())?;
    let fits = reducible_fits(&rt, &td.bad_primes, 5).map_err(|e| e.to_string())?;
    ensure(!fits.is_empty(), "no reducible fits found")?;
    ensure(
        fits.iter().all(|f| f.conductor_2_part == 0) && !fits_ramified_at(&fits, 2),
        "a fit is ramified at 2",
    )?;
    Ok(format!(
        "{} fits, all with 2-part conductor exponent 0",
        fits.len()
    ))
}

#[test]
fn acceptance() {
    let instant = Duration::from_millis(100);
    let second = Duration::from_secs(1);
    let criteria: [Criterion; 8] = [
        (1, "conductor bounds", instant, c1_bounds),
        (2, "X1 identifies level 8", second, c2_x1),
        (3, "X3 twisted residues", instant, c3_twisted_residues),
        (4, "X3 level 50 over divisors of 200", second, c4_x3_case_b),
        (
            5,
            "X3 twist descent excludes 16",
            Duration::from_secs(5),
            c5_x3_case_a,
        ),
        (6, "dimension checks", second, c6_dimensions),
        (7, "property suites", Duration::from_secs(10), c7_properties),
        (8, "X3 fits unramified at 2", second, c8_unramified_at_2),
    ];
    let mut failed = Vec::new();
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= limit {
                Ok(detail)
            } else {
                Err(format!("took {elapsed:.3?}, limit {limit:?}"))
            }
        });
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("{tag} [{id}] {name} ({elapsed:.3?} <= {limit:?}): {detail}");
        if outcome.is_err() {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
