//! Exact integer utilities: factorization, divisors, the Kronecker symbol and
//! the structure of `(Z/MZ)*`.
//!
//! Everything here is generic over a signed primitive integer `T: Int` of at
//! most 64 bits. Products that could leave the range of `T` are checked and
//! surface as [`Error::Overflow`]; modular products go through `i128`.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;

use num_integer::Integer;
use num_traits::{CheckedNeg, PrimInt, Signed};

use crate::error::{domain, Error, Result};

/// Scalar bound for the exact-arithmetic kernels.
pub trait Int:
    PrimInt + Signed + CheckedNeg + Integer + Hash + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

impl<T> Int for T where
    T: PrimInt
        + Signed
        + CheckedNeg
        + Integer
        + Hash
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}

#[inline]
fn lit<T: Int>(v: i64) -> T {
    T::from(v).expect("small literal fits every Int type")
}

#[inline]
fn wide<T: Int>(v: T) -> i128 {
    v.to_i128().expect("Int types are at most 64 bits")
}

/// `a * b mod m`, result in `[0, m)`.
pub fn mul_mod<T: Int>(a: T, b: T, m: T) -> T {
    let r = (wide(a) * wide(b)).rem_euclid(wide(m));
    T::from(r).expect("residue is below the modulus")
}

/// `base^exp mod m`, result in `[0, m)`. `m` must be positive.
pub fn pow_mod<T: Int>(base: T, mut exp: u64, m: T) -> T {
    if m == T::one() {
        return T::zero();
    }
    let mut acc = T::one();
    let mut b = base.mod_floor(&m);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        exp >>= 1;
    }
    acc
}

pub fn checked_pow<T: Int>(base: T, exp: u32) -> Result<T> {
    num_traits::checked_pow(base, exp as usize).ok_or(Error::Overflow("checked_pow"))
}

pub fn is_prime<T: Int>(n: T) -> bool {
    let two = lit::<T>(2);
    if n < two {
        return false;
    }
    if n.is_even() {
        return n == two;
    }
    let mut d = lit::<T>(3);
    while d <= n / d {
        if (n % d).is_zero() {
            return false;
        }
        d = d + two;
    }
    true
}

/// A positive integer as `prime -> exponent`, exponents always at least 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factorization<T: Int> {
    factors: BTreeMap<T, u32>,
}

impl<T: Int> Default for Factorization<T> {
    fn default() -> Self {
        Self::one()
    }
}

impl<T: Int> Factorization<T> {
    /// The empty factorization of 1.
    pub fn one() -> Self {
        Self {
            factors: BTreeMap::new(),
        }
    }

    /// Builds a factorization from `(prime, exponent)` pairs. Zero exponents are
    /// dropped; repeated primes, non-primes, and products that overflow `T`
    /// are rejected.
    pub fn from_prime_powers<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (T, u32)>,
    {
        let mut factors = BTreeMap::new();
        for (p, e) in pairs {
            if !is_prime(p) {
                return domain(format!("{p} is not prime"));
            }
            if factors.contains_key(&p) {
                return domain(format!("prime {p} listed twice"));
            }
            if e > 0 {
                factors.insert(p, e);
            }
        }
        let f = Self { factors };
        f.checked_value()?;
        Ok(f)
    }

    fn checked_value(&self) -> Result<T> {
        self.factors.iter().try_fold(T::one(), |acc, (&p, &e)| {
            acc.checked_mul(&checked_pow(p, e)?)
                .ok_or(Error::Overflow("Factorization::value"))
        })
    }

    /// The integer `prod p^e`.
    pub fn value(&self) -> T {
        self.checked_value()
            .expect("factorizations are range-checked on construction")
    }

    pub fn exponent(&self, p: T) -> u32 {
        self.factors.get(&p).copied().unwrap_or(0)
    }

    pub fn primes(&self) -> impl Iterator<Item = T> + '_ {
        self.factors.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, u32)> + '_ {
        self.factors.iter().map(|(&p, &e)| (p, e))
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Copy with the exponent of `p` replaced by `e` (removing `p` when `e = 0`).
    pub fn with_exponent(&self, p: T, e: u32) -> Result<Self> {
        if !is_prime(p) {
            return domain(format!("{p} is not prime"));
        }
        let mut factors = self.factors.clone();
        if e == 0 {
            factors.remove(&p);
        } else {
            factors.insert(p, e);
        }
        let f = Self { factors };
        f.checked_value()?;
        Ok(f)
    }

    /// Number of positive divisors, `prod (e + 1)`.
    pub fn divisor_count(&self) -> usize {
        self.factors.values().map(|&e| e as usize + 1).product()
    }

    /// All positive divisors in increasing order.
    pub fn divisors(&self) -> Vec<T> {
        let mut out = vec![T::one()];
        for (&p, &e) in &self.factors {
            let current = out.len();
            let mut pk = T::one();
            for _ in 0..e {
                pk = pk * p;
                for i in 0..current {
                    out.push(out[i] * pk);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Euler's totient of the value.
    pub fn euler_phi(&self) -> T {
        self.factors.iter().fold(T::one(), |acc, (&p, &e)| {
            acc * p.pow(e - 1) * (p - T::one())
        })
    }
}

impl<T: Int> fmt::Display for Factorization<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for (p, e) in &self.factors {
            if !first {
                write!(f, " * ")?;
            }
            first = false;
            if *e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Trial-division factorization of `n >= 1`.
pub fn factorize<T: Int>(n: T) -> Result<Factorization<T>> {
    if n < T::one() {
        return domain(format!("cannot factor {n}: expected a positive integer"));
    }
    let mut factors = BTreeMap::new();
    let mut rest = n;
    let two = lit::<T>(2);
    let mut d = two;
    while d <= rest / d {
        let mut e = 0u32;
        while (rest % d).is_zero() {
            rest = rest / d;
            e += 1;
        }
        if e > 0 {
            factors.insert(d, e);
        }
        d = if d == two { lit(3) } else { d + two };
    }
    if rest > T::one() {
        *factors.entry(rest).or_insert(0) += 1;
    }
    Ok(Factorization { factors })
}

pub fn divisors<T: Int>(f: &Factorization<T>) -> Vec<T> {
    f.divisors()
}

pub fn euler_phi<T: Int>(n: T) -> Result<T> {
    Ok(factorize(n)?.euler_phi())
}

/// Kronecker symbol `(a | n)` for `n != 0`.
pub fn kronecker<T: Int>(a: T, n: T) -> Result<i8> {
    if n.is_zero() {
        return domain("Kronecker symbol (a | 0) is not supported");
    }
    let two = lit::<T>(2);
    let eight = lit::<T>(8);
    let mut result = 1i8;
    let mut a = a;
    let mut n = n;
    if n < T::zero() {
        n = n.checked_neg().ok_or(Error::Overflow("kronecker"))?;
        if a < T::zero() {
            result = -result;
        }
    }
    let mut twos = 0u32;
    while n.is_even() {
        n = n / two;
        twos += 1;
    }
    if twos > 0 {
        if a.is_even() {
            return Ok(0);
        }
        let r = a.mod_floor(&eight);
        if twos % 2 == 1 && (r == lit(3) || r == lit(5)) {
            result = -result;
        }
    }
    // Jacobi symbol for odd positive n.
    a = a.mod_floor(&n);
    while !a.is_zero() {
        while a.is_even() {
            a = a / two;
            let r = n % eight;
            if r == lit(3) || r == lit(5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % lit(4) == lit(3) && n % lit(4) == lit(3) {
            result = -result;
        }
        a = a % n;
    }
    Ok(if n == T::one() { result } else { 0 })
}

/// Multiplicative order of `a` modulo `m`, or `None` when `gcd(a, m) != 1`.
pub fn multiplicative_order<T: Int>(a: T, m: T) -> Option<T> {
    if m <= T::zero() || !a.gcd(&m).is_one() {
        return None;
    }
    if m == T::one() {
        return Some(T::one());
    }
    let phi = factorize(m).ok()?.euler_phi();
    let mut order = phi;
    for (q, _) in factorize(phi).ok()?.iter() {
        while (order % q).is_zero() && pow_mod(a, to_u64(order / q), m).is_one() {
            order = order / q;
        }
    }
    Some(order)
}

fn to_u64<T: Int>(v: T) -> u64 {
    v.to_u64().expect("non-negative exponent")
}

/// Smallest primitive root modulo an odd prime `p`.
pub fn primitive_root<T: Int>(p: T) -> Result<T> {
    if !is_prime(p) || p == lit(2) {
        return domain(format!("primitive_root expects an odd prime, got {p}"));
    }
    let pm1 = p - T::one();
    let qs: Vec<T> = factorize(pm1)?.primes().collect();
    let mut g = lit::<T>(2);
    while g < p {
        if qs.iter().all(|&q| !pow_mod(g, to_u64(pm1 / q), p).is_one()) {
            return Ok(g);
        }
        g = g + T::one();
    }
    unreachable!("every prime has a primitive root")
}

/// One cyclic factor of `(Z/MZ)*`. `residue` is congruent to 1 modulo every
/// prime-power component of `M` other than `prime_power`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnitGenerator<T: Int> {
    pub residue: T,
    pub order: T,
    pub prime: T,
    pub prime_power: T,
}

/// `(Z/MZ)*` as an internal direct product of cyclic groups.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnitGroup<T: Int> {
    pub modulus: T,
    pub generators: Vec<UnitGenerator<T>>,
}

impl<T: Int> UnitGroup<T> {
    pub fn order(&self) -> T {
        self.generators
            .iter()
            .fold(T::one(), |acc, g| acc * g.order)
    }

    pub fn orders(&self) -> Vec<T> {
        self.generators.iter().map(|g| g.order).collect()
    }

    /// The residue `prod g_i^{e_i} mod M`.
    pub fn element(&self, exponents: &[T]) -> T {
        assert_eq!(exponents.len(), self.generators.len());
        self.generators.iter().zip(exponents).fold(
            T::one().mod_floor(&self.modulus),
            |acc, (g, &e)| {
                mul_mod(
                    acc,
                    pow_mod(g.residue, to_u64(e), self.modulus),
                    self.modulus,
                )
            },
        )
    }

    /// Exponent vector of `x` with respect to the generators (each entry
    /// reduced below the generator's order), or `None` if `x` is not a unit.
    pub fn discrete_log(&self, x: T) -> Option<Vec<T>> {
        if !x.gcd(&self.modulus).is_one() {
            return None;
        }
        let mut out = vec![T::zero(); self.generators.len()];
        let mut i = 0;
        while i < self.generators.len() {
            // Generators of one prime-power component are adjacent.
            let q = self.generators[i].prime_power;
            let mut j = i;
            while j < self.generators.len() && self.generators[j].prime_power == q {
                j += 1;
            }
            let target = x.mod_floor(&q);
            let exps = component_log(&self.generators[i..j], target, q)?;
            out[i..j].copy_from_slice(&exps);
            i = j;
        }
        Some(out)
    }
}

fn component_log<T: Int>(gens: &[UnitGenerator<T>], target: T, q: T) -> Option<Vec<T>> {
    fn search<T: Int>(
        gens: &[UnitGenerator<T>],
        acc: T,
        target: T,
        q: T,
        exps: &mut Vec<T>,
    ) -> bool {
        let Some(g) = gens.first() else {
            return acc == target;
        };
        let base = g.residue.mod_floor(&q);
        let mut cur = acc;
        let mut e = T::zero();
        while e < g.order {
            exps.push(e);
            if search(&gens[1..], cur, target, q, exps) {
                return true;
            }
            exps.pop();
            cur = mul_mod(cur, base, q);
            e = e + T::one();
        }
        false
    }
    let mut exps = Vec::with_capacity(gens.len());
    let start = T::one().mod_floor(&q);
    search(gens, start, target, q, &mut exps).then_some(exps)
}

/// `x` with `x = r (mod q)` and `x = 1 (mod m / q)`, for `q | m` coprime to `m / q`.
fn crt_lift<T: Int>(r: T, q: T, m: T) -> T {
    let rest = m / q;
    if rest.is_one() {
        return r.mod_floor(&m);
    }
    // x = 1 + rest * t with rest * t = r - 1 (mod q)
    let inv = mod_inverse(rest.mod_floor(&q), q).expect("components are coprime");
    let t = mul_mod(r - T::one(), inv, q);
    (T::one() + rest * t).mod_floor(&m)
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse<T: Int>(a: T, m: T) -> Option<T> {
    let g = a.extended_gcd(&m);
    if !g.gcd.is_one() {
        return None;
    }
    Some(g.x.mod_floor(&m))
}

/// Generators of `(Z/MZ)*`, assembled by CRT from its prime-power components.
/// Trivial factors are omitted, so `M = 1` and `M = 2` give no generators.
pub fn unit_group<T: Int>(m: T) -> Result<UnitGroup<T>> {
    let fac = factorize(m)?;
    let two = lit::<T>(2);
    let mut generators = Vec::new();
    for (p, e) in fac.iter() {
        let q = p.pow(e);
        let mut local: Vec<(T, T)> = Vec::new();
        if p == two {
            match e {
                1 => {}
                2 => local.push((q - T::one(), two)),
                _ => {
                    local.push((q - T::one(), two));
                    local.push((lit(5), two.pow(e - 2)));
                }
            }
        } else {
            let mut g = primitive_root(p)?;
            if e > 1 && pow_mod(g, to_u64(p - T::one()), p * p).is_one() {
                g = g + p;
            }
            local.push((g, p.pow(e - 1) * (p - T::one())));
        }
        for (r, order) in local {
            generators.push(UnitGenerator {
                residue: crt_lift(r, q, m),
                order,
                prime: p,
                prime_power: q,
            });
        }
    }
    Ok(UnitGroup {
        modulus: m,
        generators,
    })
}
