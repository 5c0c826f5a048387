//! Index, elliptic points, cusps and genus of `X_0(N)`, the Sturm bound, and
//! dimensions of cusp form spaces and their new subspaces for trivial
//! character and even weight.

use crate::arith::{factorize, kronecker};
use crate::error::{domain, Error, Result};
use num_integer::Integer;

/// Invariants of `Gamma_0(N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gamma0Data {
    pub level: i64,
    /// Index of `Gamma_0(N)` in `SL_2(Z)`.
    pub mu: i64,
    pub nu2: i64,
    pub nu3: i64,
    pub nu_inf: i64,
    pub genus: i64,
}

pub fn gamma0_data(level: i64) -> Result<Gamma0Data> {
    if level < 1 {
        return domain(format!("level must be positive, got {level}"));
    }
    let fac = factorize(level)?;
    let mut mu = 1i64;
    for (p, e) in fac.iter() {
        mu = mu
            .checked_mul(p.pow(e - 1) * (p + 1))
            .ok_or(Error::Overflow("gamma0_data"))?;
    }
    // (-4|p) rather than (-1|p): the factor at 2 must be 1.
    let nu2 = if level % 4 == 0 {
        0
    } else {
        fac.primes()
            .map(|p| kronecker(-4, p).map(|s| 1 + i64::from(s)))
            .product::<Result<i64>>()?
    };
    let nu3 = if level % 9 == 0 {
        0
    } else {
        fac.primes()
            .map(|p| kronecker(-3, p).map(|s| 1 + i64::from(s)))
            .product::<Result<i64>>()?
    };
    let nu_inf = fac
        .divisors()
        .into_iter()
        .map(|d| {
            let g = d.gcd(&(level / d));
            factorize(g).map(|f| f.euler_phi())
        })
        .sum::<Result<i64>>()?;
    let twelve_g = 12 + mu - 3 * nu2 - 4 * nu3 - 6 * nu_inf;
    if twelve_g % 12 != 0 || twelve_g < 0 {
        return Err(Error::Data(format!(
            "genus identity failed at N={level}: 12g = {twelve_g}"
        )));
    }
    Ok(Gamma0Data {
        level,
        mu,
        nu2,
        nu3,
        nu_inf,
        genus: twelve_g / 12,
    })
}

fn check_weight(k: u32) -> Result<()> {
    if k < 2 || k % 2 == 1 {
        return domain(format!("weight must be even and at least 2, got {k}"));
    }
    Ok(())
}

/// `ceil(k * mu(N) / 12)`.
pub fn sturm_bound(level: i64, k: u32) -> Result<i64> {
    check_weight(k)?;
    let mu = gamma0_data(level)?.mu;
    let num = mu
        .checked_mul(i64::from(k))
        .ok_or(Error::Overflow("sturm_bound"))?;
    Ok(Integer::div_ceil(&num, &12))
}

/// Dimension of `S_k(Gamma_0(N))`.
pub fn dim_cusp(level: i64, k: u32) -> Result<i64> {
    check_weight(k)?;
    let g = gamma0_data(level)?;
    if k == 2 {
        return Ok(g.genus);
    }
    let k = i64::from(k);
    Ok((k - 1) * (g.genus - 1) + (k / 2 - 1) * g.nu_inf + g.nu2 * (k / 4) + g.nu3 * (k / 3))
}

/// Multiplicative weight with `beta(p) = -2`, `beta(p^2) = 1`, `beta(p^e) = 0` for `e >= 3`.
fn beta(n: i64) -> Result<i64> {
    Ok(factorize(n)?
        .iter()
        .map(|(_, e)| match e {
            1 => -2,
            2 => 1,
            _ => 0,
        })
        .product())
}

/// Dimension of the new subspace of `S_k(Gamma_0(N))`.
pub fn dim_new(level: i64, k: u32) -> Result<i64> {
    check_weight(k)?;
    let mut total = 0i64;
    for d in factorize(level)?.divisors() {
        let b = beta(level / d)?;
        if b != 0 {
            total += b * dim_cusp(d, k)?;
        }
    }
    Ok(total)
}
