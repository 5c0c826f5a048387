//! Elimination of candidate newforms against Frobenius traces, Sturm-bound
//! certification of a survivor, the mod-ℓ twist descent that rules out a
//! large power of 2 in the level, and the end-to-end [`identify`] pipeline.
//!
//! Reports render two ways: [`EliminationReport::to_text`] for people and
//! [`EliminationReport::machine_lines`] for tools, one line per verdict:
//!
//! ```text
//! VERDICT <label> <status> [p=<prime> expected=<v> found=<v>] [reason=<token>]
//! CONCLUSION <unique-level N | multiple-survivors | no-survivors | sixteen-excluded | inconclusive | conditional>
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use num_integer::Integer;

use crate::arith::{factorize, is_prime};
use crate::conductor::{forced_residual_exponent, serre_bound, BoundTable};
use crate::error::{domain, Error, Result};
use crate::newform_db::{query, Dataset, NewformRecord, Res5};
use crate::residual::{
    fit_modulus, fits_ramified_at, reduce_traces, reducible_fits, twist_residues, CharacterFit,
    ResidueTraces, TraceData,
};
use crate::sturm_dim::sturm_bound;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AutoReason {
    /// Exact comparison needs a rational newform.
    NonRationalField,
    /// No residue-degree-1 prime above 5, so no eigenvalue reduces into F_5.
    NoDegreeOnePrime,
}

impl AutoReason {
    pub fn token(self) -> &'static str {
        match self {
            AutoReason::NonRationalField => "non-rational-field",
            AutoReason::NoDegreeOnePrime => "no-degree-1-prime-above-5",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Missing {
    Eigenvalue,
    Trace,
    Both,
}

impl Missing {
    fn token(self) -> &'static str {
        match self {
            Missing::Eigenvalue => "missing-eigenvalue",
            Missing::Trace => "missing-trace",
            Missing::Both => "missing-eigenvalue-and-trace",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    /// Mismatch at the smallest comparison prime where both values exist.
    /// `expected` is the trace (or its residue), `found` the eigenvalue.
    Eliminated {
        prime: i64,
        expected: i64,
        found: i64,
    },
    Surviving,
    /// Agreement at every prime `p <= sturm` with `p ∤ bound`.
    Certified {
        sturm: i64,
        bound: i64,
    },
    AutoEliminated(AutoReason),
    /// Certification could not run to the Sturm bound.
    CannotCertify {
        prime: i64,
        missing: Missing,
        sturm: i64,
    },
}

impl Status {
    pub fn is_alive(&self) -> bool {
        matches!(
            self,
            Status::Surviving | Status::Certified { .. } | Status::CannotCertify { .. }
        )
    }

    fn token(&self) -> &'static str {
        match self {
            Status::Eliminated { .. } => "eliminated",
            Status::Surviving => "surviving",
            Status::Certified { .. } => "certified",
            Status::AutoEliminated(_) => "auto-eliminated",
            Status::CannotCertify { .. } => "cannot-certify",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub label: String,
    pub level: i64,
    pub status: Status,
}

impl Verdict {
    pub fn machine_line(&self) -> String {
        let mut line = format!("VERDICT {} {}", self.label, self.status.token());
        match &self.status {
            Status::Eliminated {
                prime,
                expected,
                found,
            } => {
                let _ = write!(line, " p={prime} expected={expected} found={found}");
            }
            Status::AutoEliminated(r) => {
                let _ = write!(line, " reason={}", r.token());
            }
            Status::Certified { sturm, bound } => {
                let _ = write!(line, " reason=sturm-T{sturm}-B{bound}");
            }
            Status::CannotCertify { prime, missing, .. } => {
                let _ = write!(line, " p={prime} reason={}", missing.token());
            }
            Status::Surviving => {}
        }
        line
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (N={}): ", self.label, self.level)?;
        match &self.status {
            Status::Eliminated {
                prime,
                expected,
                found,
            } => write!(
                f,
                "eliminated at p={prime} (expected {expected}, found {found})"
            ),
            Status::Surviving => write!(f, "surviving"),
            Status::Certified { sturm, bound } => write!(
                f,
                "certified: agreement at all primes p <= T={sturm} with p not dividing B={bound}"
            ),
            Status::AutoEliminated(r) => write!(f, "auto-eliminated ({})", r.token()),
            Status::CannotCertify {
                prime,
                missing,
                sturm,
            } => write!(
                f,
                "cannot certify up to T={sturm}: {} at p={prime}",
                missing.token()
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Conclusion {
    UniqueLevel(i64),
    MultipleSurvivors(Vec<String>),
    NoSurvivors,
    /// Every candidate with `2^e | N` was eliminated.
    TwoPowerExcluded(u32),
    /// The twist descent could not exclude the power of 2; survivors listed.
    Inconclusive(Vec<String>),
    /// `inner` holds only if the listed `(level, weight)` spaces are complete.
    Conditional {
        gaps: Vec<(i64, u32)>,
        inner: Box<Conclusion>,
    },
}

impl Conclusion {
    /// Definitive conclusions: a unique level or an excluded power of 2.
    pub fn is_definitive(&self) -> bool {
        matches!(
            self,
            Conclusion::UniqueLevel(_) | Conclusion::TwoPowerExcluded(_)
        )
    }

    pub fn unconditional(&self) -> &Conclusion {
        match self {
            Conclusion::Conditional { inner, .. } => inner.unconditional(),
            other => other,
        }
    }

    fn with_gaps(self, gaps: Vec<(i64, u32)>) -> Conclusion {
        if gaps.is_empty() {
            return self;
        }
        match self {
            Conclusion::Conditional {
                gaps: mut old,
                inner,
            } => {
                old.extend(gaps);
                old.sort_unstable();
                old.dedup();
                Conclusion::Conditional { gaps: old, inner }
            }
            other => Conclusion::Conditional {
                gaps,
                inner: Box::new(other),
            },
        }
    }

    pub fn machine_line(&self) -> String {
        match self {
            Conclusion::UniqueLevel(n) => format!("CONCLUSION unique-level {n}"),
            Conclusion::MultipleSurvivors(_) => "CONCLUSION multiple-survivors".into(),
            Conclusion::NoSurvivors => "CONCLUSION no-survivors".into(),
            Conclusion::TwoPowerExcluded(4) => "CONCLUSION sixteen-excluded".into(),
            Conclusion::TwoPowerExcluded(e) => format!("CONCLUSION two-power-excluded {e}"),
            Conclusion::Inconclusive(_) => "CONCLUSION inconclusive".into(),
            Conclusion::Conditional { .. } => "CONCLUSION conditional".into(),
        }
    }
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conclusion::UniqueLevel(n) => write!(f, "unique level {n}"),
            Conclusion::MultipleSurvivors(s) => write!(f, "multiple survivors: {}", s.join(", ")),
            Conclusion::NoSurvivors => write!(f, "no survivors"),
            Conclusion::TwoPowerExcluded(e) => {
                write!(
                    f,
                    "2^{e} does not divide the level ({} excluded)",
                    1i64 << e
                )
            }
            Conclusion::Inconclusive(s) => {
                write!(f, "inconclusive, survivors: {}", s.join(", "))
            }
            Conclusion::Conditional { gaps, inner } => {
                let g: Vec<String> = gaps.iter().map(|(n, k)| format!("N={n} k={k}")).collect();
                write!(
                    f,
                    "{inner}, conditional on completeness of the data for {}",
                    g.join(", ")
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportParams {
    /// The level bound the candidates divide.
    pub bound: i64,
    pub weight: u32,
    /// Residue characteristic in modular-residue mode.
    pub modulus: Option<i64>,
    pub levels: Vec<i64>,
    pub comparison_primes: Vec<i64>,
}

/// Outcome of the reducible-decomposition search run before a twist descent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducibilityCheck {
    pub character_modulus: i64,
    pub fits: Vec<CharacterFit>,
    pub ramified_at_2: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationReport {
    pub verdicts: Vec<Verdict>,
    pub conclusion: Conclusion,
    pub params: ReportParams,
    pub reducibility: Option<ReducibilityCheck>,
    /// The twist-descent stage that preceded this report, if any.
    pub descent: Option<Box<EliminationReport>>,
    pub notes: Vec<String>,
}

impl EliminationReport {
    pub fn survivors(&self) -> Vec<&Verdict> {
        self.verdicts
            .iter()
            .filter(|v| v.status.is_alive())
            .collect()
    }

    pub fn verdict(&self, label: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.label == label)
    }

    pub fn machine_lines(&self) -> String {
        let mut out = String::new();
        for v in &self.verdicts {
            out.push_str(&v.machine_line());
            out.push('\n');
        }
        if let Conclusion::Conditional { gaps, .. } = &self.conclusion {
            for (n, k) in gaps {
                let _ = writeln!(out, "GAP {n} {k}");
            }
        }
        out.push_str(&self.conclusion.machine_line());
        out.push('\n');
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(d) = &self.descent {
            out.push_str("== twist descent ==\n");
            d.write_text(&mut out, false);
            out.push_str("== weight-4 elimination ==\n");
        }
        self.write_text(&mut out, true);
        out
    }

    fn write_text(&self, out: &mut String, full: bool) {
        let p = &self.params;
        let _ = write!(
            out,
            "weight {} candidates: {} levels dividing B = {}",
            p.weight,
            p.levels.len(),
            p.bound
        );
        if let Some(m) = p.modulus {
            let _ = write!(out, ", residues mod {m}");
        }
        out.push('\n');
        let primes: Vec<String> = p.comparison_primes.iter().map(|q| q.to_string()).collect();
        let _ = writeln!(out, "comparison primes: {}", primes.join(" "));
        if let Some(r) = &self.reducibility {
            let _ = writeln!(
                out,
                "reducible fits (characters mod {}): {}; ramified at 2: {}",
                r.character_modulus,
                r.fits.len(),
                if r.ramified_at_2 { "yes" } else { "no" }
            );
        }
        let shown: Vec<&Verdict> = if full {
            self.verdicts.iter().collect()
        } else {
            self.survivors()
        };
        if !full {
            let auto = self
                .verdicts
                .iter()
                .filter(|v| matches!(v.status, Status::AutoEliminated(_)))
                .count();
            let _ = writeln!(
                out,
                "{} records: {} eliminated by comparison, {auto} auto-eliminated, {} surviving",
                self.verdicts.len(),
                self.verdicts.len() - auto - shown.len(),
                shown.len()
            );
        }
        for v in shown {
            let _ = writeln!(out, "  {v}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        let _ = writeln!(out, "conclusion: {}", self.conclusion);
    }
}

fn lcm_of(levels: &BTreeSet<i64>) -> i64 {
    levels.iter().fold(1i64, |acc, &n| acc.lcm(&n))
}

fn primes_dividing(n: i64) -> BTreeSet<i64> {
    factorize(n.max(1))
        .map(|f| f.primes().collect())
        .unwrap_or_default()
}

fn conclude(verdicts: &[Verdict]) -> Conclusion {
    let alive: Vec<&Verdict> = verdicts.iter().filter(|v| v.status.is_alive()).collect();
    match alive.as_slice() {
        [] => Conclusion::NoSurvivors,
        [one] => Conclusion::UniqueLevel(one.level),
        many => Conclusion::MultipleSurvivors(many.iter().map(|v| v.label.clone()).collect()),
    }
}

fn exact_status(record: &NewformRecord, traces: &BTreeMap<i64, i64>, primes: &[i64]) -> Status {
    if !record.is_rational() {
        return Status::AutoEliminated(AutoReason::NonRationalField);
    }
    for &p in primes {
        if let (Some(&a), Some(&t)) = (record.exact_ap.get(&p), traces.get(&p)) {
            if a != t {
                return Status::Eliminated {
                    prime: p,
                    expected: t,
                    found: a,
                };
            }
        }
    }
    Status::Surviving
}

/// Compares exact eigenvalues of rational newforms at the given levels and
/// weight with the traces. Primes in the bad set or dividing a candidate
/// level are never compared.
pub fn eliminate_exact(
    ds: &Dataset,
    td: &TraceData,
    levels: &BTreeSet<i64>,
    weight: u32,
) -> EliminationReport {
    let bound = lcm_of(levels);
    let skip = primes_dividing(bound);
    let primes: Vec<i64> = td
        .traces
        .keys()
        .copied()
        .filter(|p| !td.bad_primes.contains(p) && !skip.contains(p))
        .collect();
    let records = query(ds, levels, weight);
    let verdicts: Vec<Verdict> = records
        .iter()
        .map(|r| Verdict {
            label: r.label.clone(),
            level: r.level,
            status: exact_status(r, &td.traces, &primes),
        })
        .collect();
    let mut notes = Vec::new();
    if verdicts.is_empty() {
        notes.push(format!(
            "no weight-{weight} records at the candidate levels"
        ));
    }
    EliminationReport {
        conclusion: conclude(&verdicts),
        verdicts,
        params: ReportParams {
            bound,
            weight,
            modulus: None,
            levels: levels.iter().copied().collect(),
            comparison_primes: primes,
        },
        reducibility: None,
        descent: None,
        notes,
    }
}

/// Checks `a_p = t_p` for every prime `p <= T` with `p ∤ B`, where
/// `T = sturm_bound(B, k)` is taken at the full level bound `B`.
pub fn certify(
    ds: &Dataset,
    td: &TraceData,
    label: &str,
    bound: i64,
    weight: u32,
) -> Result<Verdict> {
    let record = ds
        .record(label)
        .ok_or_else(|| Error::Data(format!("no record labelled `{label}`")))?;
    let sturm = sturm_bound(bound, weight)?;
    let verdict = |status| Verdict {
        label: record.label.clone(),
        level: record.level,
        status,
    };
    if !record.is_rational() {
        return Ok(verdict(Status::AutoEliminated(
            AutoReason::NonRationalField,
        )));
    }
    let mut first_missing = None;
    for p in (2..=sturm).filter(|&p| is_prime(p) && bound % p != 0) {
        match (record.exact_ap.get(&p), td.traces.get(&p)) {
            (Some(&a), Some(&t)) if a != t => {
                return Ok(verdict(Status::Eliminated {
                    prime: p,
                    expected: t,
                    found: a,
                }))
            }
            (Some(_), Some(_)) => {}
            (a, t) => {
                if first_missing.is_none() {
                    let missing = match (a, t) {
                        (None, None) => Missing::Both,
                        (None, _) => Missing::Eigenvalue,
                        _ => Missing::Trace,
                    };
                    first_missing = Some((p, missing));
                }
            }
        }
    }
    Ok(verdict(match first_missing {
        Some((prime, missing)) => Status::CannotCertify {
            prime,
            missing,
            sturm,
        },
        None => Status::Certified { sturm, bound },
    }))
}

fn mod_status(record: &NewformRecord, rt: &ResidueTraces, primes: &[i64]) -> Result<Status> {
    let ell = rt.modulus;
    let stored: BTreeMap<i64, i64> = if record.is_rational() {
        record
            .exact_ap
            .iter()
            .map(|(&p, &a)| (p, a.rem_euclid(ell)))
            .collect()
    } else {
        if ell != 5 {
            return Err(Error::Data(format!(
                "{}: stored residues are modulo 5, comparison is modulo {ell}",
                record.label
            )));
        }
        match record.res5 {
            Res5::None => return Ok(Status::AutoEliminated(AutoReason::NoDegreeOnePrime)),
            Res5::NotApplicable => {
                return Err(Error::Data(format!(
                    "{}: non-rational record without res5",
                    record.label
                )))
            }
            Res5::Ok => {}
        }
        let mut out = BTreeMap::new();
        for (&p, r) in &record.residue_ap {
            if r.modulus != ell {
                return Err(Error::Data(format!(
                    "{}: residue at p={p} is modulo {}, comparison is modulo {ell}",
                    record.label, r.modulus
                )));
            }
            out.insert(p, r.value.rem_euclid(ell));
        }
        out
    };
    for &p in primes {
        if let (Some(&found), Some(&expected)) = (stored.get(&p), rt.residues.get(&p)) {
            if found != expected {
                return Ok(Status::Eliminated {
                    prime: p,
                    expected,
                    found,
                });
            }
        }
    }
    Ok(Status::Surviving)
}

/// Compares eigenvalues modulo ℓ with residue data, already twisted as
/// needed by the caller.
pub fn eliminate_mod(
    ds: &Dataset,
    rt: &ResidueTraces,
    levels: &BTreeSet<i64>,
    weight: u32,
) -> Result<EliminationReport> {
    let bound = lcm_of(levels);
    let skip = primes_dividing(bound);
    let primes: Vec<i64> = rt
        .residues
        .keys()
        .copied()
        .filter(|p| !skip.contains(p) && *p != rt.modulus)
        .collect();
    let verdicts = query(ds, levels, weight)
        .into_iter()
        .map(|r| {
            Ok(Verdict {
                label: r.label.clone(),
                level: r.level,
                status: mod_status(r, rt, &primes)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut notes = Vec::new();
    if verdicts.is_empty() {
        notes.push(format!(
            "no weight-{weight} records at the candidate levels"
        ));
    }
    Ok(EliminationReport {
        conclusion: conclude(&verdicts),
        verdicts,
        params: ReportParams {
            bound,
            weight,
            modulus: Some(rt.modulus),
            levels: levels.iter().copied().collect(),
            comparison_primes: primes,
        },
        reducibility: None,
        descent: None,
        notes,
    })
}

fn v2(n: i64) -> u32 {
    n.trailing_zeros()
}

/// Rules out `2^e | N` for `e = required_2_exponent >= 3`.
///
/// Since `e >= 3`, the residual conductor keeps the same 2-exponent. A
/// reducible residual representation would be unramified at 2, which the
/// fit search checks; so the residual representation is irreducible and its
/// cyclotomic twist comes from a weight-2 newform of level divisible by
/// `2^e`. The weight-2 candidates are eliminated modulo ℓ against
/// `p * t_p`.
pub fn twist_descent(
    ds_w2: &Dataset,
    td: &TraceData,
    bt: &BoundTable,
    required_2_exponent: u32,
    ell: i64,
) -> Result<EliminationReport> {
    if required_2_exponent < 3 {
        return domain(format!(
            "twist descent needs a 2-exponent of at least 3, got {required_2_exponent}"
        ));
    }
    if !bt.bad_primes.contains(&2) || bt.exponent(2) < required_2_exponent {
        return domain(format!(
            "2^{required_2_exponent} does not divide the level bound {}",
            bt.value()
        ));
    }
    let forced = forced_residual_exponent(required_2_exponent);
    let residues = reduce_traces(td, ell)?;
    let fits = reducible_fits(&residues, &bt.bad_primes, ell)?;
    let ramified_at_2 = fits_ramified_at(&fits, 2);
    let twisted = twist_residues(&residues, 1);

    let levels: BTreeSet<i64> = bt
        .candidate_levels()
        .into_iter()
        .filter(|&d| v2(d) >= forced)
        .collect();
    let mut report = eliminate_mod(ds_w2, &twisted, &levels, 2)?;
    report.params.bound = bt.value();
    let queried = query(ds_w2, &levels, 2).len();
    debug_assert_eq!(report.verdicts.len(), queried);

    let survivors: Vec<String> = report.survivors().iter().map(|v| v.label.clone()).collect();
    let conclusion = if ramified_at_2 {
        report.notes.push(
            "a reducible fit is ramified at 2, so irreducibility of the residual \
             representation is not established"
                .into(),
        );
        Conclusion::Inconclusive(survivors)
    } else if !survivors.is_empty() || report.verdicts.len() != queried {
        Conclusion::Inconclusive(survivors)
    } else {
        Conclusion::TwoPowerExcluded(required_2_exponent)
    };
    let gaps: Vec<(i64, u32)> = levels
        .iter()
        .filter(|&&n| !ds_w2.is_complete(n, 2))
        .map(|&n| (n, 2))
        .collect();
    report.conclusion = conclusion.with_gaps(gaps);
    report.reducibility = Some(ReducibilityCheck {
        character_modulus: fit_modulus(&bt.bad_primes, ell),
        fits,
        ramified_at_2,
    });
    Ok(report)
}

/// The full pipeline: level bound, optional twist descent at 2 (when 2 is a
/// bad prime and weight-2 data is supplied), exact elimination at weight 4,
/// and Sturm certification of a unique survivor.
pub fn identify(
    ds_w4: &Dataset,
    ds_w2: Option<&Dataset>,
    td: &TraceData,
) -> Result<EliminationReport> {
    if td.traces.is_empty() {
        return domain("no traces supplied");
    }
    const WEIGHT: u32 = 4;
    const ELL: i64 = 5;
    let mut bt = serre_bound(td.bad_primes.iter().copied())?;
    let mut gaps = Vec::new();
    let mut notes = Vec::new();
    let mut descent = None;

    if bt.bad_primes.contains(&2) {
        match ds_w2 {
            Some(ds_w2) => {
                let d = twist_descent(ds_w2, td, &bt, 4, ELL)?;
                match &d.conclusion {
                    Conclusion::TwoPowerExcluded(_) => bt = bt.restricted(2, 3)?,
                    Conclusion::Conditional { gaps: g, inner }
                        if matches!(**inner, Conclusion::TwoPowerExcluded(_)) =>
                    {
                        bt = bt.restricted(2, 3)?;
                        gaps.extend(g.iter().copied());
                    }
                    _ => notes.push(
                        "twist descent did not exclude 16 | N; keeping the full 2-exponent bound"
                            .into(),
                    ),
                }
                if let Some(r) = &d.reducibility {
                    if !r.fits.is_empty() {
                        notes.push(format!(
                            "{} reducible fits match the mod-{ELL} residues; reducibility of the \
                             residual representation is not decided here",
                            r.fits.len()
                        ));
                    }
                }
                descent = Some(Box::new(d));
            }
            None => notes.push("no weight-2 data: twist descent skipped".into()),
        }
    }

    let levels: BTreeSet<i64> = bt.candidate_levels().into_iter().collect();
    let mut report = eliminate_exact(ds_w4, td, &levels, WEIGHT);
    report.params.bound = bt.value();
    gaps.extend(
        levels
            .iter()
            .filter(|&&n| !ds_w4.is_complete(n, WEIGHT))
            .map(|&n| (n, WEIGHT)),
    );

    if let Conclusion::UniqueLevel(_) = report.conclusion {
        let idx = report
            .verdicts
            .iter()
            .position(|v| v.status.is_alive())
            .expect("a unique level has a survivor");
        let checked = certify(ds_w4, td, &report.verdicts[idx].label, bt.value(), WEIGHT)?;
        match &checked.status {
            Status::Certified { .. } | Status::Eliminated { .. } => {
                report.verdicts[idx] = checked;
            }
            Status::CannotCertify {
                prime,
                missing,
                sturm,
            } => notes.push(format!(
                "{} not certified: Sturm bound T={sturm} at B={}, first gap at p={prime} ({})",
                checked.label,
                bt.value(),
                missing.token()
            )),
            _ => {}
        }
        report.conclusion = conclude(&report.verdicts);
    }

    report.notes.extend(notes);
    report.conclusion = report.conclusion.clone().with_gaps(gaps);
    report.descent = descent;
    Ok(report)
}
