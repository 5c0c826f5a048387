//! Mod-ℓ computations on Frobenius trace data: reduction, cyclotomic
//! twisting, characters `(Z/MZ)* -> F_ℓ*`, and the search for reducible
//! decompositions `ε χ^i ⊕ ε^{-1} χ^j` compatible with the residues.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;

use crate::arith::{is_prime, mod_inverse, pow_mod, primitive_root, unit_group};
use crate::error::{domain, Error, Result};
use crate::newform_db::{parse_int, parse_prime, ramanujan_bound};
use crate::UnitGroup;

/// Bad-reduction primes and traces of Frobenius at good primes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TraceData {
    pub bad_primes: BTreeSet<i64>,
    pub traces: BTreeMap<i64, i64>,
}

impl TraceData {
    /// Checks that every prime is prime, that no trace is given at a bad prime
    /// and that `|t_p| <= 2 p^(3/2)`.
    pub fn new(bad_primes: BTreeSet<i64>, traces: BTreeMap<i64, i64>) -> Result<Self> {
        if let Some(p) = bad_primes.iter().find(|p| !is_prime(**p)) {
            return domain(format!("bad prime {p} is not prime"));
        }
        for (&p, &t) in &traces {
            if !is_prime(p) {
                return domain(format!("trace index {p} is not prime"));
            }
            if bad_primes.contains(&p) {
                return domain(format!("trace given at bad prime {p}"));
            }
            let bound = ramanujan_bound(p, 4).ok_or(Error::Overflow("Weil bound"))?;
            if t.unsigned_abs() > bound.unsigned_abs() {
                return domain(format!(
                    "|t_{p}| = {} exceeds the Weil bound {bound}",
                    t.abs()
                ));
            }
        }
        Ok(Self { bad_primes, traces })
    }

    /// Parses the trace file format:
    ///
    /// ```text
    /// # comment
    /// bad 2 5
    /// t 3 -2
    /// t 7 -26
    /// ```
    ///
    /// A trace listed at a bad prime is dropped with a warning; the prime stays
    /// in the bad set, which only loosens the level bound.
    pub fn parse(text: &str) -> Result<(Self, Vec<String>)> {
        let mut bad: Option<BTreeSet<i64>> = None;
        let mut traces = BTreeMap::new();
        let mut warnings = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            let Some((&keyword, rest)) = tokens.split_first() else {
                continue;
            };
            let err = |message: String| Err(Error::Parse { line, message });
            match keyword {
                "bad" => {
                    if bad.is_some() {
                        return err("second `bad` line".into());
                    }
                    if !traces.is_empty() {
                        return err("`bad` must come before any `t` line".into());
                    }
                    let primes = rest
                        .iter()
                        .map(|tok| parse_prime(tok, line))
                        .collect::<Result<BTreeSet<_>>>()?;
                    bad = Some(primes);
                }
                "t" => {
                    let Some(bad) = bad.as_ref() else {
                        return err("`t` line before the `bad` line".into());
                    };
                    let [p, v] = rest else {
                        return err("expected `t <p> <int>`".into());
                    };
                    let p = parse_prime(p, line)?;
                    let v = parse_int(v, line)?;
                    if bad.contains(&p) {
                        warnings.push(format!(
                            "line {line}: trace at bad prime {p} ignored; {p} stays in the bad set"
                        ));
                        continue;
                    }
                    if traces.insert(p, v).is_some() {
                        return err(format!("t_{p} given twice"));
                    }
                }
                other => return err(format!("unknown keyword `{other}`")),
            }
        }
        let Some(bad) = bad else {
            return Err(Error::Parse {
                line: 0,
                message: "missing `bad` line".into(),
            });
        };
        Ok((Self::new(bad, traces)?, warnings))
    }
}

/// Residues modulo a small prime ℓ, canonical representatives in `[0, ℓ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueTraces {
    pub modulus: i64,
    pub residues: BTreeMap<i64, i64>,
}

impl ResidueTraces {
    /// Representatives in `(-ℓ/2, ℓ/2]`, for display.
    pub fn balanced(&self) -> BTreeMap<i64, i64> {
        self.residues
            .iter()
            .map(|(&p, &r)| (p, balanced(r, self.modulus)))
            .collect()
    }
}

pub fn balanced(r: i64, modulus: i64) -> i64 {
    let r = r.rem_euclid(modulus);
    if 2 * r > modulus {
        r - modulus
    } else {
        r
    }
}

fn check_ell(ell: i64) -> Result<()> {
    if !is_prime(ell) {
        return domain(format!("residue characteristic {ell} is not prime"));
    }
    Ok(())
}

/// `t_p mod ℓ` for every trace, dropping the entry at `p = ℓ` if present.
pub fn reduce_traces(td: &TraceData, ell: i64) -> Result<ResidueTraces> {
    check_ell(ell)?;
    Ok(ResidueTraces {
        modulus: ell,
        residues: td
            .traces
            .iter()
            .filter(|(&p, _)| p != ell)
            .map(|(&p, &t)| (p, t.rem_euclid(ell)))
            .collect(),
    })
}

/// Multiplies each residue by `p^power`, i.e. twists by a power of the
/// mod-ℓ cyclotomic character.
pub fn twist_residues(rt: &ResidueTraces, power: i64) -> ResidueTraces {
    let ell = rt.modulus;
    let e = power.rem_euclid(ell - 1) as u64;
    ResidueTraces {
        modulus: ell,
        residues: rt
            .residues
            .iter()
            .map(|(&p, &r)| (p, (pow_mod(p, e, ell) * r).rem_euclid(ell)))
            .collect(),
    }
}

/// A homomorphism `(Z/MZ)* -> F_ℓ*`, stored as the discrete logarithms (base
/// a fixed primitive root of `F_ℓ`) of the images of the unit-group generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Character {
    group: Arc<UnitGroup>,
    ell: i64,
    root: i64,
    exponents: Vec<i64>,
}

impl Character {
    pub fn modulus(&self) -> i64 {
        self.group.modulus
    }

    pub fn ell(&self) -> i64 {
        self.ell
    }

    /// Images of the generators as logarithms base the primitive root of `F_ℓ`.
    pub fn exponents(&self) -> &[i64] {
        &self.exponents
    }

    pub fn group(&self) -> &UnitGroup {
        &self.group
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    pub fn inverse(&self) -> Self {
        let n = self.ell - 1;
        Self {
            exponents: self.exponents.iter().map(|&e| (n - e) % n).collect(),
            ..self.clone()
        }
    }

    /// Order of the character in the dual group.
    pub fn order(&self) -> i64 {
        let n = self.ell - 1;
        self.exponents
            .iter()
            .fold(1, |acc, &e| acc.lcm(&(n / n.gcd(&e))))
    }

    fn log_at_exponents(&self, xs: &[i64]) -> i64 {
        let n = self.ell - 1;
        self.exponents
            .iter()
            .zip(xs)
            .map(|(&e, &x)| (e * x).rem_euclid(n))
            .sum::<i64>()
            .rem_euclid(n)
    }

    /// `ε(x)` in `[1, ℓ)`, or `None` when `x` is not coprime to the modulus.
    pub fn value(&self, x: i64) -> Option<i64> {
        let xs = self.group.discrete_log(x)?;
        Some(pow_mod(
            self.root,
            self.log_at_exponents(&xs) as u64,
            self.ell,
        ))
    }

    /// Exponent of `p` in the conductor.
    pub fn conductor_exponent(&self, p: i64) -> u32 {
        let idx: Vec<usize> = (0..self.group.generators.len())
            .filter(|&i| self.group.generators[i].prime == p)
            .collect();
        if idx.iter().all(|&i| self.exponents[i] == 0) {
            return 0;
        }
        let q = self.group.generators[idx[0]].prime_power;
        let k = valuation(q, p);
        // Elements of the p-component, as (residue mod p^k, character log).
        let mut elements = vec![(1i64, 0i64)];
        for &i in &idx {
            let g = &self.group.generators[i];
            let base = g.residue.rem_euclid(q);
            let mut next = Vec::with_capacity(elements.len() * g.order as usize);
            for &(r, l) in &elements {
                let mut cur = r;
                for e in 0..g.order {
                    let log = (l + e * self.exponents[i]).rem_euclid(self.ell - 1);
                    next.push((cur, log));
                    cur = cur * base % q;
                }
            }
            elements = next;
        }
        (1..=k)
            .find(|&f| {
                let pf = p.pow(f);
                elements
                    .iter()
                    .filter(|(r, _)| r % pf == 1 % pf)
                    .all(|&(_, l)| l == 0)
            })
            .unwrap_or(k)
    }
}

fn valuation(mut n: i64, p: i64) -> u32 {
    let mut k = 0;
    while n % p == 0 {
        n /= p;
        k += 1;
    }
    k
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi mod {} [", self.modulus())?;
        for (i, (g, e)) in self
            .group
            .generators
            .iter()
            .zip(&self.exponents)
            .enumerate()
        {
            if i > 0 {
                write!(f, ", ")?;
            }
            let image = pow_mod(self.root, *e as u64, self.ell);
            write!(f, "{}->{}", g.residue, image)?;
        }
        write!(f, "]")
    }
}

/// Every character `(Z/MZ)* -> F_ℓ*`, in lexicographic order of generator images.
pub fn enumerate_characters(modulus: i64, ell: i64) -> Result<Vec<Character>> {
    check_ell(ell)?;
    let group = Arc::new(unit_group(modulus)?);
    let n = ell - 1;
    let root = if ell == 2 { 1 } else { primitive_root(ell)? };
    let choices: Vec<Vec<i64>> = group
        .generators
        .iter()
        .map(|g| {
            let step = n / n.gcd(&g.order);
            (0..n).step_by(step as usize).collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(choices.len());
    fn walk(choices: &[Vec<i64>], current: &mut Vec<i64>, emit: &mut dyn FnMut(&[i64])) {
        match choices.split_first() {
            None => emit(current),
            Some((first, rest)) => {
                for &e in first {
                    current.push(e);
                    walk(rest, current, emit);
                    current.pop();
                }
            }
        }
    }
    walk(&choices, &mut current, &mut |exps| {
        out.push(Character {
            group: Arc::clone(&group),
            ell,
            root,
            exponents: exps.to_vec(),
        })
    });
    Ok(out)
}

/// A reducible decomposition `ε χ^i ⊕ ε^{-1} χ^j` matching the residues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterFit {
    pub epsilon: Character,
    pub i: i64,
    pub j: i64,
    /// Exponent of 2 in the conductor of ε.
    pub conductor_2_part: u32,
}

impl CharacterFit {
    /// Re-evaluates `ε(p) p^i + ε^{-1}(p) p^j (mod ℓ)` against every residue.
    pub fn verify(&self, rt: &ResidueTraces) -> bool {
        let ell = self.epsilon.ell;
        let inv = self.epsilon.inverse();
        rt.residues
            .iter()
            .all(|(&p, &r)| match (self.epsilon.value(p), inv.value(p)) {
                (Some(a), Some(b)) => {
                    let lhs =
                        a * pow_mod(p, self.i as u64, ell) + b * pow_mod(p, self.j as u64, ell);
                    lhs.rem_euclid(ell) == r
                }
                _ => false,
            })
    }
}

impl fmt::Display for CharacterFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "eps={} i={} j={} cond_2={}",
            self.epsilon, self.i, self.j, self.conductor_2_part
        )
    }
}

/// Modulus carrying every admissible ε: `2^4` if 2 is bad, each other odd bad
/// prime once, and one factor ℓ.
pub fn fit_modulus(bad_primes: &BTreeSet<i64>, ell: i64) -> i64 {
    let mut m = ell;
    for &p in bad_primes {
        if p == ell {
            continue;
        }
        m *= if p == 2 { 16 } else { p };
    }
    m
}

/// Reducible fits for a weight-4 family, where the determinant is `χ^3`.
pub fn reducible_fits(
    rt: &ResidueTraces,
    bad_primes: &BTreeSet<i64>,
    ell: i64,
) -> Result<Vec<CharacterFit>> {
    reducible_fits_for_weight(rt, bad_primes, ell, 4)
}

/// All `(ε, i, j)` with `i + j = k - 1 (mod ℓ - 1)` and
/// `t_p = ε(p) p^i + ε(p)^{-1} p^j (mod ℓ)` at every residue prime.
pub fn reducible_fits_for_weight(
    rt: &ResidueTraces,
    bad_primes: &BTreeSet<i64>,
    ell: i64,
    weight: u32,
) -> Result<Vec<CharacterFit>> {
    check_ell(ell)?;
    if rt.modulus != ell {
        return Err(Error::Data(format!(
            "residues are modulo {} but the fit search is modulo {ell}",
            rt.modulus
        )));
    }
    let m = fit_modulus(bad_primes, ell);
    if let Some(p) = rt.residues.keys().find(|&&p| m % p == 0) {
        return Err(Error::Data(format!(
            "residue prime {p} divides the character modulus {m}"
        )));
    }
    let n = ell - 1;
    let det = (i64::from(weight) - 1).rem_euclid(n);
    let chars = enumerate_characters(m, ell)?;
    // Per-prime data: (p^e mod ℓ for e in 0..n).
    let powers: Vec<(i64, i64, Vec<i64>)> = rt
        .residues
        .iter()
        .map(|(&p, &r)| (p, r, (0..n).map(|e| pow_mod(p, e as u64, ell)).collect()))
        .collect();
    let mut fits = Vec::new();
    for eps in chars {
        let values: Vec<(i64, i64)> = powers
            .iter()
            .map(|(p, _, _)| {
                let a = eps
                    .value(*p)
                    .expect("residue primes are coprime to the modulus");
                (a, mod_inverse(a, ell).expect("character values are units"))
            })
            .collect();
        for i in 0..n {
            let j = (det - i).rem_euclid(n);
            let ok = powers.iter().zip(&values).all(|((_, r, pw), (a, b))| {
                (a * pw[i as usize] + b * pw[j as usize]).rem_euclid(ell) == *r
            });
            if ok {
                fits.push(CharacterFit {
                    conductor_2_part: eps.conductor_exponent(2),
                    epsilon: eps.clone(),
                    i,
                    j,
                });
            }
        }
    }
    if let Some(bad) = fits.iter().find(|f| !f.verify(rt)) {
        return Err(Error::Data(format!("fit failed re-verification: {bad}")));
    }
    Ok(fits)
}

/// Whether some fit's character is ramified at `p`.
pub fn fits_ramified_at(fits: &[CharacterFit], p: i64) -> bool {
    fits.iter().any(|f| f.epsilon.conductor_exponent(p) > 0)
}
