//! Property bodies shared by the proptest suite and the acceptance runner.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use cylevel::arith::{factorize, is_prime, pow_mod};
use cylevel::conductor::{carayol_allowed, forced_residual_exponent, serre_bound};
use cylevel::elimination::eliminate_exact;
use cylevel::newform_db::{
    parse_db, query, ramanujan_bound, validate, CompletenessClaim, Dataset, NewformRecord, Res5,
    Residue,
};
use cylevel::residual::{enumerate_characters, reducible_fits, twist_residues, ResidueTraces};
use cylevel::TraceData;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

type Outcome = Result<(), TestCaseError>;

pub const X3_PRIMES: [i64; 6] = [3, 7, 11, 13, 17, 19];

pub fn w4_shared() -> &'static Dataset {
    static DS: OnceLock<Dataset> = OnceLock::new();
    DS.get_or_init(super::w4)
}

fn rational_w4() -> Vec<&'static NewformRecord> {
    w4_shared()
        .records
        .iter()
        .filter(|r| r.is_rational())
        .collect()
}

pub fn divisor_count_identity(n: i64) -> Outcome {
    let f = factorize(n).unwrap();
    let divs = f.divisors();
    let product: usize = f.iter().map(|(_, e)| e as usize + 1).product();
    prop_assert_eq!(f.divisor_count(), product);
    prop_assert_eq!(divs.len(), product);
    prop_assert!(divs.windows(2).all(|w| w[0] < w[1]));
    prop_assert!(divs.iter().all(|d| n % d == 0));
    Ok(())
}

/// Pushes one eigenvalue of a rational weight-4 record past the Ramanujan bound.
pub fn ramanujan_corruption_detected(
    pick: usize,
    prime_pick: usize,
    excess: i64,
    negative: bool,
) -> Outcome {
    let records = rational_w4();
    let target = records[pick % records.len()];
    let primes: Vec<i64> = target.exact_ap.keys().copied().collect();
    let p = primes[prime_pick % primes.len()];
    let bound = ramanujan_bound(p, 4).unwrap();
    let bad = if negative {
        -(bound + excess)
    } else {
        bound + excess
    };

    let mut ds = w4_shared().clone();
    let rec = ds
        .records
        .iter_mut()
        .find(|r| r.label == target.label)
        .unwrap();
    rec.exact_ap.insert(p, bad);
    let violations = validate(&ds);
    let needle = format!("Ramanujan bound exceeded at p={p}");
    prop_assert!(violations
        .iter()
        .any(|v| v.label.as_deref() == Some(target.label.as_str()) && v.message.contains(&needle)));
    Ok(())
}

pub fn residues_strategy() -> impl Strategy<Value = ResidueTraces> {
    prop::sample::select(vec![3i64, 5, 7, 11, 13]).prop_flat_map(|ell| {
        let primes: Vec<i64> = (2..200).filter(|&p| is_prime(p) && p != ell).collect();
        prop::collection::btree_map(prop::sample::select(primes), 0..ell, 0..12).prop_map(
            move |residues| ResidueTraces {
                modulus: ell,
                residues,
            },
        )
    })
}

pub fn twist_additive_and_periodic(rt: &ResidueTraces, a: i64, b: i64) -> Outcome {
    let ell = rt.modulus;
    prop_assert_eq!(
        twist_residues(&twist_residues(rt, a), b),
        twist_residues(rt, a + b)
    );
    prop_assert_eq!(&twist_residues(rt, ell - 1), rt);
    prop_assert_eq!(twist_residues(rt, a), twist_residues(rt, a + ell - 1));
    Ok(())
}

fn x3_bad() -> BTreeSet<i64> {
    BTreeSet::from([2, 5])
}

/// Residues at the X3 primes, either random or built from a planted
/// `(ε, i, 3 - i)` decomposition modulo 5.
pub fn fits_closed_and_verified(values: &[i64], planted: Option<(usize, i64)>) -> Outcome {
    let chars = enumerate_characters(80, 5).unwrap();
    let residues: BTreeMap<i64, i64> = match planted {
        None => X3_PRIMES
            .iter()
            .copied()
            .zip(values.iter().map(|v| v.rem_euclid(5)))
            .collect(),
        Some((k, i)) => {
            let eps = &chars[k % chars.len()];
            let inv = eps.inverse();
            let j = (3 - i).rem_euclid(4);
            X3_PRIMES
                .iter()
                .map(|&p| {
                    let t = eps.value(p).unwrap() * pow_mod(p, i as u64, 5)
                        + inv.value(p).unwrap() * pow_mod(p, j as u64, 5);
                    (p, t.rem_euclid(5))
                })
                .collect()
        }
    };
    let rt = ResidueTraces {
        modulus: 5,
        residues,
    };
    let fits = reducible_fits(&rt, &x3_bad(), 5).unwrap();
    if let Some((k, i)) = planted {
        let eps = &chars[k % chars.len()];
        prop_assert!(fits.iter().any(|f| &f.epsilon == eps && f.i == i));
    }
    for f in &fits {
        prop_assert!(f.verify(&rt));
        prop_assert_eq!((f.i + f.j).rem_euclid(4), 3);
        let swapped = f.epsilon.inverse();
        prop_assert!(
            fits.iter()
                .any(|g| g.epsilon == swapped && g.i == f.j && g.j == f.i),
            "swap of {} missing",
            f
        );
    }
    Ok(())
}

pub fn character_count(modulus: i64, ell: i64) -> Outcome {
    let chars = enumerate_characters(modulus, ell).unwrap();
    let group = chars[0].group();
    let want: i64 = group
        .generators
        .iter()
        .map(|g| num_integer::gcd(g.order, ell - 1))
        .product();
    prop_assert_eq!(chars.len() as i64, want);
    let units: Vec<i64> = (1..modulus.max(2))
        .filter(|&x| num_integer::gcd(x, modulus) == 1)
        .collect();
    for c in chars.iter().take(6) {
        for &x in units.iter().take(12) {
            for &y in units.iter().take(12) {
                let xy = c.value(x * y % modulus.max(1)).unwrap();
                prop_assert_eq!(xy, c.value(x).unwrap() * c.value(y).unwrap() % ell);
            }
        }
    }
    Ok(())
}

fn traces_from(record: &NewformRecord, bad: &BTreeSet<i64>, keep: &[bool]) -> BTreeMap<i64, i64> {
    record
        .exact_ap
        .iter()
        .filter(|(p, _)| !bad.contains(p) && record.level % **p != 0)
        .zip(keep.iter().cycle())
        .filter(|(_, &k)| k)
        .map(|((&p, &a), _)| (p, a))
        .collect()
}

/// Traces copied from a record never eliminate that record.
pub fn elimination_self_consistent(pick: usize, keep: &[bool]) -> Outcome {
    let records = rational_w4();
    let r = records[pick % records.len()];
    let bad: BTreeSet<i64> = factorize(r.level).unwrap().primes().collect();
    let td = TraceData::new(bad.clone(), traces_from(r, &bad, keep)).unwrap();
    let levels: BTreeSet<i64> = w4_shared().records.iter().map(|r| r.level).collect();
    let report = eliminate_exact(w4_shared(), &td, &levels, 4);
    prop_assert!(report.verdict(&r.label).unwrap().status.is_alive());
    Ok(())
}

/// More traces never revive an eliminated record.
pub fn elimination_monotone(pick: usize, keep: &[bool], extra: &[bool], nudge: usize) -> Outcome {
    let bad = BTreeSet::from([2, 5]);
    let levels: BTreeSet<i64> = (1..=200).filter(|d| 200 % d == 0).collect();
    let records = rational_w4();
    let r = records[pick % records.len()];
    let mut small = traces_from(r, &bad, keep);
    if let Some((&p, t)) = small.iter_mut().nth(nudge % 4) {
        let w = ramanujan_bound(p, 4).unwrap();
        *t = if *t < w { *t + 1 } else { *t - 1 };
    }
    let mut large = traces_from(r, &bad, extra);
    for (p, t) in &small {
        large.insert(*p, *t);
    }
    let ds = w4_shared();
    let a = eliminate_exact(ds, &TraceData::new(bad.clone(), small).unwrap(), &levels, 4);
    let b = eliminate_exact(ds, &TraceData::new(bad, large).unwrap(), &levels, 4);
    for v in &a.verdicts {
        if !v.status.is_alive() {
            prop_assert!(
                !b.verdict(&v.label).unwrap().status.is_alive(),
                "{} revived",
                v.label
            );
        }
    }
    prop_assert!(b.survivors().len() <= a.survivors().len());
    Ok(())
}

fn record_strategy() -> impl Strategy<Value = NewformRecord> {
    let primes: Vec<i64> = (2..100).filter(|&p| is_prime(p)).collect();
    (
        1i64..5000,
        (1u32..7).prop_map(|h| 2 * h),
        1u32..5,
        any::<bool>(),
        prop::collection::btree_map(prop::sample::select(primes), -2000i64..2000, 0..8),
    )
        .prop_map(|(level, weight, degree, ok, values)| {
            let (res5, exact_ap, residue_ap) = match (degree, ok) {
                (1, _) => (Res5::NotApplicable, values, BTreeMap::new()),
                (_, true) => (
                    Res5::Ok,
                    BTreeMap::new(),
                    values
                        .into_iter()
                        .map(|(p, v)| {
                            (
                                p,
                                Residue {
                                    value: v.rem_euclid(5),
                                    modulus: 5,
                                },
                            )
                        })
                        .collect(),
                ),
                (_, false) => (Res5::None, BTreeMap::new(), BTreeMap::new()),
            };
            NewformRecord {
                level,
                weight,
                label: String::new(),
                degree,
                res5,
                exact_ap,
                residue_ap,
            }
        })
}

pub fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    (
        prop::collection::vec(record_strategy(), 0..12),
        prop::collection::vec((1i64..5000, (1u32..7).prop_map(|h| 2 * h)), 0..5),
    )
        .prop_map(|(mut records, claims)| {
            for (i, r) in records.iter_mut().enumerate() {
                r.label = format!("{}.{}.{}", r.level, r.weight, i + 1);
            }
            Dataset {
                records,
                completeness: claims
                    .into_iter()
                    .map(|(level, weight)| CompletenessClaim {
                        level,
                        weight,
                        complete: true,
                    })
                    .collect(),
            }
        })
}

pub fn serialize_round_trip(ds: &Dataset) -> Outcome {
    let text = ds.serialize();
    let back = parse_db(&text).unwrap();
    prop_assert_eq!(&back, ds);
    prop_assert_eq!(back.serialize(), text);
    Ok(())
}

pub fn query_subset_and_ordered(levels: &BTreeSet<i64>, weight: u32) -> Outcome {
    let ds = w4_shared();
    let hits = query(ds, levels, weight);
    prop_assert!(hits
        .iter()
        .all(|r| levels.contains(&r.level) && r.weight == weight));
    prop_assert!(hits
        .windows(2)
        .all(|w| (w[0].level, &w[0].label) <= (w[1].level, &w[1].label)));
    let want = ds
        .records
        .iter()
        .filter(|r| levels.contains(&r.level) && r.weight == weight)
        .count();
    prop_assert_eq!(hits.len(), want);
    prop_assert_eq!(query(ds, levels, weight), hits);
    Ok(())
}

pub const SMALL_PRIMES: [i64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Splits the small primes into two disjoint sets (side 2 means neither).
pub fn bound_multiplicative(sides: &[u8]) -> Outcome {
    let pick = |s: u8| -> Vec<i64> {
        SMALL_PRIMES
            .iter()
            .zip(sides)
            .filter(|(_, &side)| side == s)
            .map(|(&p, _)| p)
            .collect()
    };
    let (s1, s2) = (pick(0), pick(1));
    let union: Vec<i64> = s1.iter().chain(&s2).copied().collect();
    let b1 = serre_bound(s1).unwrap().value();
    let b2 = serre_bound(s2).unwrap().value();
    prop_assert_eq!(serre_bound(union).unwrap().value(), b1 * b2);
    Ok(())
}

pub fn carayol_rules(e: u32, other: u32) -> Outcome {
    prop_assert!(carayol_allowed(e, e));
    if other > e {
        prop_assert!(!carayol_allowed(other, e));
    }
    let f = forced_residual_exponent(e);
    prop_assert!(carayol_allowed(f, e));
    prop_assert!((0..f).all(|x| !carayol_allowed(x, e)));
    if e >= 3 {
        prop_assert_eq!(f, e);
    }
    Ok(())
}
