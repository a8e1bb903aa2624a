//! Exact Bernoulli numbers, von Staudt denominators and the constants `N_2g`.
//! No floating point here.

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::arith::{primes_up_to, valuation};
use crate::error::{Error, Result};
use crate::report::CheckReport;

/// `B_0 .. B_tmax` from `sum_{j <= t} C(t+1, j) B_j = 0`, `B_0 = 1` (so `B_1 = -1/2`).
pub fn bernoulli_table(t_max: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(t_max + 1);
    b.push(Rational::from(1));
    for t in 1..=t_max {
        if t >= 3 && t % 2 == 1 {
            b.push(Rational::new());
            continue;
        }
        let mut s = Rational::new();
        let mut binom = Integer::from(1); // C(t+1, j)
        for (j, bj) in b.iter().enumerate() {
            s += &binom * Rational::from(bj);
            binom = binom * (t + 1 - j) as u64 / (j + 1) as u64;
        }
        // binom is now C(t+1, t) = t + 1
        b.push(-s / binom);
    }
    b
}

pub fn bernoulli(t: usize) -> Rational {
    bernoulli_table(t).pop().unwrap()
}

fn check_even(c: u64) -> Result<()> {
    if c == 0 {
        return Err(Error::InvalidInput("c must be positive".into()));
    }
    if c % 2 == 1 {
        return Err(Error::OddInput(c));
    }
    Ok(())
}

/// `prod_{p prime, (p - 1) | c} p` for even `c >= 2`.
pub fn von_staudt_denominator(c: u64) -> Result<Integer> {
    check_even(c)?;
    let mut d = Integer::from(1);
    for p in primes_up_to(c + 1) {
        if c.is_multiple_of(p - 1) {
            d *= p;
        }
    }
    Ok(d)
}

/// `N_2g = 2 * denominator((-1)^(g+1) B_2g / 2g)`.
pub fn n2g(g: u64) -> Result<Integer> {
    if g == 0 {
        return Err(Error::InvalidInput("g must be positive".into()));
    }
    Ok(bernoulli_quotient_denominator(2 * g, &bernoulli(2 * g as usize)) * 2u32)
}

fn bernoulli_quotient_denominator(c: u64, bc: &Rational) -> Integer {
    let q = Rational::from(bc / Integer::from(c));
    q.denom().clone()
}

/// `2 prod_{(p - 1) | c} p^(v_p(c) + 1)`.
pub fn denominator_prime_product(c: u64) -> Result<Integer> {
    check_even(c)?;
    let mut r = Integer::from(2);
    for p in primes_up_to(c + 1) {
        if c.is_multiple_of(p - 1) {
            r *= Integer::from(p).pow(valuation(c, p) + 1);
        }
    }
    Ok(r)
}

/// Compares `2 denominator((-1)^((c+2)/2) B_c / c)` from the recurrence with the prime product.
pub fn verify_denominator_identity(c: u64) -> Result<CheckReport> {
    check_even(c)?;
    let b = bernoulli(c as usize);
    let sign = if ((c + 2) / 2).is_multiple_of(2) { 1 } else { -1 };
    let lhs = bernoulli_quotient_denominator(c, &(b.clone() * sign)) * 2u32;
    let rhs = denominator_prime_product(c)?;
    let vs = von_staudt_denominator(c)?;
    let holds = lhs == rhs && &vs == b.denom();
    Ok(CheckReport::exact("bernoulli_denominator", 0, holds)
        .with_input("c", c)
        .with_output("lhs", &lhs)
        .with_output("rhs", &rhs)
        .with_output("bernoulli", &b)
        .with_output("von_staudt", &vs))
}
