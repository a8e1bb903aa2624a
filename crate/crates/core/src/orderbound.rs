//! Bounds on the order of `x -> x^c` on ratio sets `{ l / k mod p^d : k = l mod n }`,
//! in a refined per-prime form and a coarse closed form, plus an exhaustive oracle.

use std::collections::BTreeMap;
use std::fmt;

use rug::Integer;

use crate::arith::{is_prime, mod_inverse, primes_up_to, valuation};
use crate::error::{Error, Result};
use crate::report::CheckReport;

/// Largest modulus `p^d` [`max_admissible_delta`] will enumerate.
pub const MAX_MODULUS: u64 = 1_000_000;

/// Modulus cap used by [`verify_ratio_order`] when it trims `delta_max` per prime.
pub const VERIFY_MODULUS: u64 = 100_000;

/// Which rule produced the power of two.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwoPart {
    /// `n`, `c` odd: `2`.
    BothOdd,
    /// `n` odd, `c` even: `2^(2 + v2(c))`.
    OddModulus,
    /// `n` even: `2^(v2(n) + v2(c) + w)`, `w = 1` iff `v2(n) = 1` and `c` even.
    EvenModulus { w: u32 },
}

impl fmt::Display for TwoPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TwoPart::BothOdd => f.write_str("n odd, c odd"),
            TwoPart::OddModulus => f.write_str("n odd, c even"),
            TwoPart::EvenModulus { w } => write!(f, "n even, w={w}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub n: u64,
    pub c: u64,
    pub refined: Integer,
    pub coarse: Integer,
    /// Exponent of each prime in `refined`.
    pub per_prime: BTreeMap<u64, u32>,
    pub two_part: TwoPart,
}

impl BoundReport {
    pub fn exponent(&self, p: u64) -> u32 {
        self.per_prime.get(&p).copied().unwrap_or(0)
    }

    pub fn refined_divides_coarse(&self) -> bool {
        self.coarse.is_divisible(&self.refined)
    }
}

fn check_nc(n: u64, c: u64) -> Result<()> {
    if n == 0 || c == 0 {
        return Err(Error::InvalidInput(format!("n and c must be positive, got n={n}, c={c}")));
    }
    Ok(())
}

/// Refined bound: `F2 * prod_{p odd, p !| n, (p-1) | c} p^(1 + v_p(c)) * prod_{p odd, p | n} p^(v_p(n) + v_p(c))`.
pub fn ratio_order_refined(n: u64, c: u64) -> Result<BoundReport> {
    check_nc(n, c)?;
    let mut per_prime = BTreeMap::new();
    let (two_part, e2) = match (n.is_multiple_of(2), c.is_multiple_of(2)) {
        (false, false) => (TwoPart::BothOdd, 1),
        (false, true) => (TwoPart::OddModulus, 2 + valuation(c, 2)),
        (true, _) => {
            let w = u32::from(valuation(n, 2) == 1 && c.is_multiple_of(2));
            (TwoPart::EvenModulus { w }, valuation(n, 2) + valuation(c, 2) + w)
        }
    };
    per_prime.insert(2, e2);
    for p in primes_up_to(n.max(c + 1)).into_iter().filter(|&p| p != 2) {
        let e = if n.is_multiple_of(p) {
            valuation(n, p) + valuation(c, p)
        } else if c.is_multiple_of(p - 1) {
            1 + valuation(c, p)
        } else {
            0
        };
        if e > 0 {
            per_prime.insert(p, e);
        }
    }
    let refined = per_prime.iter().fold(Integer::from(1), |acc, (&p, &e)| acc * Integer::from(Integer::u_pow_u(p as u32, e)));
    Ok(BoundReport { n, c, refined, coarse: ratio_order_coarse(n, c)?, per_prime, two_part })
}

/// Coarse bound `2 n c prod_{p !| n, (p-1) | c} p`.
pub fn ratio_order_coarse(n: u64, c: u64) -> Result<Integer> {
    check_nc(n, c)?;
    let mut r = Integer::from(2) * n * c;
    for p in primes_up_to(c + 1) {
        if !n.is_multiple_of(p) && c.is_multiple_of(p - 1) {
            r *= p;
        }
    }
    Ok(r)
}

fn modulus(p: u64, delta: u32, limit: u64) -> Result<u64> {
    let mut m = 1u64;
    for _ in 0..delta {
        m = m.checked_mul(p).filter(|&v| v <= limit).ok_or_else(|| Error::Overflow(format!("{p}^{delta} exceeds {limit}")))?;
    }
    Ok(m)
}

/// `{ l k^-1 mod p^delta : 1 <= k, l <= p^delta n, p !| kl, k = l mod n }`, sorted.
/// Enumerates every pair; cost `p^(2 delta) n`.
pub fn residue_ratio_set(p: u64, delta: u32, n: u64) -> Result<Vec<u64>> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    check_nc(n, 1)?;
    let m = modulus(p, delta, MAX_MODULUS)?;
    let span = m * n;
    let mut seen = vec![false; m as usize];
    for k in 1..=span {
        if k % p == 0 {
            continue;
        }
        let kinv = mod_inverse(k % m, m).unwrap_or(0);
        let mut l = (k - 1) % n + 1;
        while l <= span {
            if !l.is_multiple_of(p) {
                seen[((l % m) * kinv % m) as usize] = true;
            }
            l += n;
        }
    }
    Ok(seen.iter().enumerate().filter(|(_, &s)| s).map(|(x, _)| x as u64).collect())
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Largest `delta <= delta_max` such that `x^c = 1 mod p^d` on the ratio set for every `d <= delta`.
/// Stops at the first failing level.
pub fn max_admissible_delta(p: u64, n: u64, c: u64, delta_max: u32) -> Result<u32> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    check_nc(n, c)?;
    if delta_max == 0 {
        return Err(Error::InvalidInput("delta_max must be at least 1".into()));
    }
    modulus(p, delta_max, MAX_MODULUS)?;
    for delta in 1..=delta_max {
        let m = modulus(p, delta, MAX_MODULUS)?;
        let set = residue_ratio_set(p, delta, n)?;
        if set.iter().any(|&x| pow_mod(x, c, m) != 1) {
            return Ok(delta - 1);
        }
    }
    Ok(delta_max)
}

/// Per-prime outcome of [`verify_ratio_order`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeCheck {
    pub p: u64,
    /// `delta_max` after trimming to `p^d <= VERIFY_MODULUS`.
    pub delta_cap: u32,
    pub brute: u32,
    pub formula: u32,
}

impl PrimeCheck {
    pub fn sound(&self) -> bool {
        self.brute <= self.formula
    }

    /// The oracle reaches the formula's (nonzero) exponent.
    pub fn tight(&self) -> bool {
        self.formula > 0 && self.brute == self.formula
    }
}

#[derive(Clone, Debug)]
pub struct RatioOrderVerification {
    pub bound: BoundReport,
    pub primes: Vec<PrimeCheck>,
    pub report: CheckReport,
}

impl RatioOrderVerification {
    pub fn tight_primes(&self) -> Vec<u64> {
        self.primes.iter().filter(|c| c.tight()).map(|c| c.p).collect()
    }

    pub fn failures(&self) -> usize {
        self.primes.iter().filter(|c| !c.sound()).count() + usize::from(!self.bound.refined_divides_coarse())
    }
}

/// Checks the refined bound against the oracle for every prime `p <= p_max`.
pub fn verify_ratio_order(n: u64, c: u64, p_max: u64, delta_max: u32) -> Result<RatioOrderVerification> {
    let bound = ratio_order_refined(n, c)?;
    let mut primes = Vec::new();
    for p in primes_up_to(p_max) {
        let mut cap = 0u32;
        while cap < delta_max && modulus(p, cap + 1, VERIFY_MODULUS).is_ok() {
            cap += 1;
        }
        if cap == 0 {
            continue;
        }
        let brute = max_admissible_delta(p, n, c, cap)?;
        primes.push(PrimeCheck { p, delta_cap: cap, brute, formula: bound.exponent(p) });
    }
    let holds = bound.refined_divides_coarse() && primes.iter().all(PrimeCheck::sound);
    let tight: Vec<String> = primes.iter().filter(|c| c.tight()).map(|c| c.p.to_string()).collect();
    let per: Vec<String> = primes.iter().filter(|c| c.brute > 0 || c.formula > 0).map(|c| format!("{}:{}/{}", c.p, c.brute, c.formula)).collect();
    let report = CheckReport::exact("ratio_order", 0, holds)
        .with_input("n", n)
        .with_input("c", c)
        .with_input("p_max", p_max)
        .with_input("delta_max", delta_max)
        .with_output("refined", &bound.refined)
        .with_output("coarse", &bound.coarse)
        .with_output("brute/formula", per.join(" "))
        .with_output("tight", tight.join(","));
    Ok(RatioOrderVerification { bound, primes, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refined_examples() {
        let r = ratio_order_refined(1, 2).unwrap();
        assert_eq!(r.refined, 24);
        assert_eq!(r.two_part, TwoPart::OddModulus);
        assert_eq!(ratio_order_refined(3, 2).unwrap().refined, 24);
        assert_eq!(ratio_order_refined(1, 4).unwrap().refined, 240);
        assert_eq!(ratio_order_refined(1, 1).unwrap().refined, 2);
        assert_eq!(ratio_order_refined(2, 2).unwrap().two_part, TwoPart::EvenModulus { w: 1 });
    }

    #[test]
    fn coarse_examples() {
        assert_eq!(ratio_order_coarse(1, 2).unwrap(), 24);
        assert_eq!(ratio_order_coarse(3, 2).unwrap(), 24);
        assert_eq!(ratio_order_coarse(1, 4).unwrap(), 240);
        assert!(ratio_order_coarse(0, 2).is_err());
    }

    #[test]
    fn refined_divides_coarse() {
        for n in 1..=30 {
            for c in 1..=20 {
                assert!(ratio_order_refined(n, c).unwrap().refined_divides_coarse(), "n={n} c={c}");
            }
        }
    }

    #[test]
    fn admissible_delta_examples() {
        assert_eq!(max_admissible_delta(3, 1, 2, 4).unwrap(), 1);
        assert_eq!(max_admissible_delta(2, 1, 2, 5).unwrap(), 3);
        assert_eq!(max_admissible_delta(3, 3, 2, 4).unwrap(), 1);
        assert_eq!(max_admissible_delta(4, 1, 2, 2), Err(Error::NotPrime(4)));
        assert!(matches!(max_admissible_delta(2, 1, 2, 21), Err(Error::Overflow(_))));
    }

    fn units(m: u64, p: u64) -> Vec<u64> {
        (0..m).filter(|x| x % p != 0).collect()
    }

    #[test]
    fn ratio_set_is_subgroup() {
        for (p, d, n) in [(2u64, 4u32, 2u64), (2, 5, 4), (3, 3, 3), (3, 3, 2), (5, 2, 5), (2, 4, 6)] {
            let m = p.pow(d);
            let s = residue_ratio_set(p, d, n).unwrap();
            assert!(s.contains(&1));
            for &a in &s {
                for &b in &s {
                    assert!(s.binary_search(&(a * b % m)).is_ok(), "p={p} d={d} n={n}");
                }
            }
        }
    }

    #[test]
    fn ratio_set_full_when_p_coprime_to_n() {
        for (p, d, n) in [(2u64, 4u32, 3u64), (3, 3, 4), (5, 2, 6), (7, 2, 1)] {
            assert_eq!(residue_ratio_set(p, d, n).unwrap(), units(p.pow(d), p));
        }
    }

    #[test]
    fn ratio_set_is_reduction_kernel_when_p_divides_n() {
        for (p, d, n) in [(2u64, 5u32, 2u64), (2, 5, 4), (3, 3, 3), (3, 4, 9), (2, 4, 12), (5, 3, 10)] {
            let beta = valuation(n, p);
            assert!(d > beta);
            let pb = p.pow(beta);
            let kernel: Vec<u64> = units(p.pow(d), p).into_iter().filter(|x| x % pb == 1 % pb).collect();
            assert_eq!(residue_ratio_set(p, d, n).unwrap(), kernel, "p={p} d={d} n={n}");
        }
    }

    #[test]
    fn verify_examples() {
        let v = verify_ratio_order(1, 2, 50, 6).unwrap();
        assert!(v.report.passed());
        assert_eq!(v.tight_primes(), vec![2, 3]);
        assert!(verify_ratio_order(2, 2, 50, 6).unwrap().report.passed());
        let v = verify_ratio_order(1, 4, 50, 6).unwrap();
        assert!(v.report.passed());
        assert_eq!(v.tight_primes(), vec![2, 3, 5]);
    }
}
