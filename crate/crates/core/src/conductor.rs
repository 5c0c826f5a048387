//! Conductor exponent caps for the compatible family, the candidate levels
//! they allow, and the admissible drops between residual and full conductor
//! exponents at a prime.

use std::collections::BTreeSet;
use std::fmt;

use crate::arith::is_prime;
use crate::error::{domain, Result};
use crate::Factorization;

/// Largest exponent of `p` that can occur in the level: 8 at 2, 5 at 3 and 2
/// at every larger prime.
pub fn serre_exponent(p: i64) -> Result<u32> {
    if !is_prime(p) {
        return domain(format!("{p} is not prime"));
    }
    Ok(match p {
        2 => 8,
        3 => 5,
        _ => 2,
    })
}

/// Per-prime exponent caps for a bad-reduction set and the resulting level bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundTable {
    pub bad_primes: BTreeSet<i64>,
    pub bound: Factorization,
}

impl BoundTable {
    /// The cap `b_p` (0 for primes outside the bad set).
    pub fn exponent(&self, p: i64) -> u32 {
        self.bound.exponent(p)
    }

    pub fn value(&self) -> i64 {
        self.bound.value()
    }

    pub fn candidate_levels(&self) -> Vec<i64> {
        self.bound.divisors()
    }

    /// The table with the cap at `p` lowered to `e`. Used once a larger
    /// exponent has been ruled out by other means.
    pub fn restricted(&self, p: i64, e: u32) -> Result<Self> {
        if !self.bad_primes.contains(&p) {
            return domain(format!("{p} is not in the bad-reduction set"));
        }
        if e > self.exponent(p) {
            return domain(format!(
                "cannot raise the cap at {p} from {} to {e}",
                self.exponent(p)
            ));
        }
        Ok(Self {
            bad_primes: self.bad_primes.clone(),
            bound: self.bound.with_exponent(p, e)?,
        })
    }
}

impl fmt::Display for BoundTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.bad_primes {
            writeln!(f, "b_{p} = {}", self.exponent(*p))?;
        }
        write!(f, "B = {} = {}", self.value(), self.bound)
    }
}

pub fn serre_bound<I>(bad_primes: I) -> Result<BoundTable>
where
    I: IntoIterator<Item = i64>,
{
    let bad_primes: BTreeSet<i64> = bad_primes.into_iter().collect();
    let pairs = bad_primes
        .iter()
        .map(|&p| serre_exponent(p).map(|e| (p, e)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundTable {
        bound: Factorization::from_prime_powers(pairs)?,
        bad_primes,
    })
}

pub fn candidate_levels(bt: &BoundTable) -> Vec<i64> {
    bt.candidate_levels()
}

/// Whether a residual exponent `e_resid` is compatible with a full exponent
/// `e_full` at a prime where the determinant is unramified: equality, or one
/// of the drops (0,1), (0,2), (1,2).
pub fn carayol_allowed(e_resid: u32, e_full: u32) -> bool {
    e_resid == e_full || matches!((e_resid, e_full), (0, 1) | (0, 2) | (1, 2))
}

/// Smallest residual exponent compatible with `e_full`. For `e_full >= 3` no
/// drop is possible, so the residual exponent equals the full one.
pub fn forced_residual_exponent(e_full: u32) -> u32 {
    (0..=e_full)
        .find(|&e| carayol_allowed(e, e_full))
        .expect("equality is always allowed")
}
