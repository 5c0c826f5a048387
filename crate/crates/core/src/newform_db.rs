//! Newform eigenvalue datasets: a line-oriented text format, structural
//! validation against dimension formulas, and level/weight queries.
//!
//! ```text
//! # comment
//! complete N=8 k=4
//! newform N=8 k=4 label=8.4.1 deg=1
//! a 3 -4
//! a 5 -2
//! end
//! newform N=160 k=2 label=160.2.3 deg=2 res5=ok
//! am 3 4 5
//! end
//! ```
//!
//! `a` lines carry exact eigenvalues of rational newforms. Orbits with a
//! larger coefficient field carry `am` lines instead: residues of `a_p` at a
//! residue-degree-1 prime above 5, when one exists (`res5=ok`). `res5=none`
//! records that no such prime exists.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::{self, Write as _};

use crate::arith::is_prime;
use crate::error::{Error, Result};
use crate::sturm_dim::dim_new;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Res5 {
    /// Rational newform; exact eigenvalues are stored.
    NotApplicable,
    /// A residue-degree-1 prime above 5 exists and residues are stored for it.
    Ok,
    /// No residue-degree-1 prime above 5 exists in the coefficient field.
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Residue {
    pub value: i64,
    pub modulus: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewformRecord {
    pub level: i64,
    pub weight: u32,
    pub label: String,
    /// Degree of the coefficient field over Q.
    pub degree: u32,
    pub res5: Res5,
    pub exact_ap: BTreeMap<i64, i64>,
    pub residue_ap: BTreeMap<i64, Residue>,
}

impl NewformRecord {
    pub fn is_rational(&self) -> bool {
        self.degree == 1
    }
}

/// A claim that every Galois orbit of newforms at `(level, weight)` is present.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CompletenessClaim {
    pub level: i64,
    pub weight: u32,
    pub complete: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dataset {
    pub records: Vec<NewformRecord>,
    pub completeness: Vec<CompletenessClaim>,
}

impl Dataset {
    pub fn record(&self, label: &str) -> Option<&NewformRecord> {
        self.records.iter().find(|r| r.label == label)
    }

    pub fn is_complete(&self, level: i64, weight: u32) -> bool {
        self.completeness
            .iter()
            .any(|c| c.complete && c.level == level && c.weight == weight)
    }

    /// Writes the dataset back in the text format accepted by [`parse_db`].
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for c in self.completeness.iter().filter(|c| c.complete) {
            let _ = writeln!(out, "complete N={} k={}", c.level, c.weight);
        }
        for r in &self.records {
            let _ = write!(
                out,
                "newform N={} k={} label={} deg={}",
                r.level, r.weight, r.label, r.degree
            );
            match r.res5 {
                Res5::NotApplicable => out.push('\n'),
                Res5::Ok => out.push_str(" res5=ok\n"),
                Res5::None => out.push_str(" res5=none\n"),
            }
            for (p, a) in &r.exact_ap {
                let _ = writeln!(out, "a {p} {a}");
            }
            for (p, res) in &r.residue_ap {
                let _ = writeln!(out, "am {p} {} {}", res.value, res.modulus);
            }
            out.push_str("end\n");
        }
        out
    }
}

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        message: message.into(),
    })
}

/// Decimal integer with an optional leading ASCII `-` or U+2212 minus sign.
pub(crate) fn parse_int(tok: &str, line: usize) -> Result<i64> {
    let (neg, digits) = if let Some(rest) = tok.strip_prefix('-') {
        (true, rest)
    } else if let Some(rest) = tok.strip_prefix('\u{2212}') {
        (true, rest)
    } else {
        (false, tok)
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return parse_err(line, format!("expected an integer, found `{tok}`"));
    }
    let signed = if neg {
        format!("-{digits}")
    } else {
        digits.to_string()
    };
    signed
        .parse::<i64>()
        .or_else(|_| parse_err(line, format!("integer out of range: `{tok}`")))
}

pub(crate) fn parse_prime(tok: &str, line: usize) -> Result<i64> {
    let p = parse_int(tok, line)?;
    if !is_prime(p) {
        return parse_err(line, format!("{p} is not prime"));
    }
    Ok(p)
}

fn key_values<'a>(tokens: &[&'a str], line: usize) -> Result<BTreeMap<&'a str, &'a str>> {
    let mut map = BTreeMap::new();
    for tok in tokens {
        let Some((k, v)) = tok.split_once('=') else {
            return parse_err(line, format!("expected key=value, found `{tok}`"));
        };
        if map.insert(k, v).is_some() {
            return parse_err(line, format!("duplicate key `{k}`"));
        }
    }
    Ok(map)
}

fn weight_value(tok: &str, line: usize) -> Result<u32> {
    let k = parse_int(tok, line)?;
    u32::try_from(k).or_else(|_| parse_err(line, format!("invalid weight {k}")))
}

fn parse_level_weight(kv: &BTreeMap<&str, &str>, line: usize) -> Result<(i64, u32)> {
    let level = kv
        .get("N")
        .map(|v| parse_int(v, line))
        .unwrap_or_else(|| parse_err(line, "missing N="))?;
    let weight = kv
        .get("k")
        .map(|v| weight_value(v, line))
        .unwrap_or_else(|| parse_err(line, "missing k="))?;
    Ok((level, weight))
}

fn parse_header(tokens: &[&str], line: usize) -> Result<NewformRecord> {
    let kv = key_values(tokens, line)?;
    if let Some(k) = kv
        .keys()
        .find(|k| !matches!(**k, "N" | "k" | "label" | "deg" | "res5"))
    {
        return parse_err(line, format!("unknown key `{k}`"));
    }
    let (level, weight) = parse_level_weight(&kv, line)?;
    let label = match kv.get("label") {
        Some(l) if !l.is_empty() => l.to_string(),
        _ => return parse_err(line, "missing label="),
    };
    let degree = match kv.get("deg") {
        Some(d) => {
            let d = parse_int(d, line)?;
            match u32::try_from(d) {
                Ok(d) if d >= 1 => d,
                _ => return parse_err(line, format!("invalid deg {d}")),
            }
        }
        None => return parse_err(line, "missing deg="),
    };
    let res5 = match (degree, kv.get("res5").copied()) {
        (1, None) => Res5::NotApplicable,
        (1, Some(_)) => return parse_err(line, "res5 is only allowed when deg > 1"),
        (_, Some("ok")) => Res5::Ok,
        (_, Some("none")) => Res5::None,
        (_, Some(v)) => return parse_err(line, format!("res5 must be ok or none, found `{v}`")),
        (_, None) => return parse_err(line, "res5 is required when deg > 1"),
    };
    Ok(NewformRecord {
        level,
        weight,
        label,
        degree,
        res5,
        exact_ap: BTreeMap::new(),
        residue_ap: BTreeMap::new(),
    })
}

/// Strict parser for the dataset format. Any unknown keyword or misplaced
/// line is an error carrying its 1-based line number; a repeated label is a
/// validation error.
pub fn parse_db(text: &str) -> Result<Dataset> {
    let mut ds = Dataset::default();
    let mut open: Option<(usize, NewformRecord)> = None;
    let mut labels = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some((&keyword, rest)) = tokens.split_first() else {
            continue;
        };
        match (keyword, open.as_mut()) {
            ("newform", None) => open = Some((line, parse_header(rest, line)?)),
            ("newform", Some(_)) => return parse_err(line, "newform inside an open block"),
            ("a", Some((_, rec))) => {
                if !rec.is_rational() {
                    return parse_err(line, "exact eigenvalue in a record with deg > 1");
                }
                let [p, v] = rest else {
                    return parse_err(line, "expected `a <p> <int>`");
                };
                let p = parse_prime(p, line)?;
                if rec.exact_ap.insert(p, parse_int(v, line)?).is_some() {
                    return parse_err(line, format!("a_{p} given twice"));
                }
            }
            ("am", Some((_, rec))) => {
                if rec.res5 != Res5::Ok {
                    return parse_err(line, "residue eigenvalue requires deg > 1 and res5=ok");
                }
                let [p, r, m] = rest else {
                    return parse_err(line, "expected `am <p> <residue> <modulus>`");
                };
                let p = parse_prime(p, line)?;
                let res = Residue {
                    value: parse_int(r, line)?,
                    modulus: parse_int(m, line)?,
                };
                if rec.residue_ap.insert(p, res).is_some() {
                    return parse_err(line, format!("residue of a_{p} given twice"));
                }
            }
            ("end", Some(_)) => {
                if !rest.is_empty() {
                    return parse_err(line, "unexpected tokens after end");
                }
                let (_, rec) = open.take().expect("block is open");
                if !labels.insert(rec.label.clone()) {
                    return Err(Error::Validation(format!(
                        "duplicate label `{}` (line {line})",
                        rec.label
                    )));
                }
                ds.records.push(rec);
            }
            ("complete", None) => {
                let kv = key_values(rest, line)?;
                if let Some(k) = kv.keys().find(|k| !matches!(**k, "N" | "k")) {
                    return parse_err(line, format!("unknown key `{k}`"));
                }
                let (level, weight) = parse_level_weight(&kv, line)?;
                ds.completeness.push(CompletenessClaim {
                    level,
                    weight,
                    complete: true,
                });
            }
            ("a" | "am" | "end", None) => {
                return parse_err(line, format!("`{keyword}` outside a newform block"))
            }
            ("complete", Some(_)) => {
                return parse_err(line, "completeness claim inside a newform block")
            }
            (other, _) => return parse_err(line, format!("unknown keyword `{other}`")),
        }
    }
    if let Some((start, rec)) = open {
        return parse_err(
            start,
            format!("newform block `{}` is not closed by end", rec.label),
        );
    }
    Ok(ds)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub label: Option<String>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(l) => write!(f, "{l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

/// `floor(2 * p^((k-1)/2))`, computed exactly as the largest `b` with
/// `b^2 <= 4 p^(k-1)`.
pub fn ramanujan_bound(p: i64, k: u32) -> Option<i64> {
    let sq = 4i128.checked_mul(i128::from(p).checked_pow(k.checked_sub(1)?)?)?;
    let mut b = (sq as f64).sqrt() as i128;
    while b * b > sq {
        b -= 1;
    }
    while (b + 1) * (b + 1) <= sq {
        b += 1;
    }
    i64::try_from(b).ok()
}

fn record_violations(r: &NewformRecord, out: &mut Vec<Violation>) {
    let mut push = |message: String| {
        out.push(Violation {
            label: Some(r.label.clone()),
            message,
        })
    };
    if r.level < 1 {
        push(format!("level {} is not positive", r.level));
    }
    if r.weight < 2 || r.weight % 2 == 1 {
        push(format!("weight {} is not even and at least 2", r.weight));
    }
    if r.degree == 0 {
        push("degree 0".to_string());
    }
    match (r.degree, r.res5) {
        (1, Res5::NotApplicable) | (2.., Res5::Ok | Res5::None) => {}
        (1, _) => push("res5 given for a rational newform".to_string()),
        _ => push("res5 missing for a non-rational newform".to_string()),
    }
    if !r.exact_ap.is_empty() && r.degree != 1 {
        push("exact eigenvalues stored for a non-rational newform".to_string());
    }
    if !r.residue_ap.is_empty() && r.res5 != Res5::Ok {
        push("residue eigenvalues stored without res5=ok".to_string());
    }
    for (&p, &a) in &r.exact_ap {
        if !is_prime(p) {
            push(format!("eigenvalue index {p} is not prime"));
            continue;
        }
        match ramanujan_bound(p, r.weight) {
            Some(b) if a.unsigned_abs() > b.unsigned_abs() => {
                push(format!("Ramanujan bound exceeded at p={p} (|{a}| > {b})"))
            }
            Some(_) => {}
            None => push(format!("Ramanujan bound at p={p} is out of range")),
        }
    }
    for (&p, res) in &r.residue_ap {
        if !is_prime(p) {
            push(format!("residue index {p} is not prime"));
        }
        if res.modulus < 2 {
            push(format!(
                "residue modulus {} at p={p} is below 2",
                res.modulus
            ));
        } else if !(0..res.modulus).contains(&res.value) {
            push(format!(
                "residue {} at p={p} is outside [0, {})",
                res.value, res.modulus
            ));
        }
    }
}

/// Every invariant violation in the dataset. An empty list means the dataset
/// is consistent, including degree sums against `dim_new` for claimed-complete
/// spaces.
pub fn validate(ds: &Dataset) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for r in &ds.records {
        if !seen.insert(r.label.as_str()) {
            out.push(Violation {
                label: Some(r.label.clone()),
                message: "duplicate label".to_string(),
            });
        }
        record_violations(r, &mut out);
    }
    let mut checked = HashSet::new();
    for c in ds.completeness.iter().filter(|c| c.complete) {
        if !checked.insert((c.level, c.weight)) {
            continue;
        }
        let expected = match dim_new(c.level, c.weight) {
            Ok(d) => d,
            Err(e) => {
                out.push(Violation {
                    label: None,
                    message: format!("completeness claim N={} k={}: {e}", c.level, c.weight),
                });
                continue;
            }
        };
        let (count, degree_sum) = ds
            .records
            .iter()
            .filter(|r| r.level == c.level && r.weight == c.weight)
            .fold((0i64, 0i64), |(n, s), r| (n + 1, s + i64::from(r.degree)));
        if count > expected {
            out.push(Violation {
                label: None,
                message: format!(
                    "N={} k={}: {count} records exceed dim_new {expected}",
                    c.level, c.weight
                ),
            });
        }
        if degree_sum != expected {
            out.push(Violation {
                label: None,
                message: format!(
                    "N={} k={}: degree sum {degree_sum} \u{2260} dim_new {expected}",
                    c.level, c.weight
                ),
            });
        }
    }
    out
}

/// Records with level in `levels` and the given weight, ordered by `(level, label)`.
pub fn query<'a>(ds: &'a Dataset, levels: &BTreeSet<i64>, weight: u32) -> Vec<&'a NewformRecord> {
    let mut out: Vec<&NewformRecord> = ds
        .records
        .iter()
        .filter(|r| r.weight == weight && levels.contains(&r.level))
        .collect();
    out.sort_by(|a, b| (a.level, &a.label).cmp(&(b.level, &b.label)));
    out
}
