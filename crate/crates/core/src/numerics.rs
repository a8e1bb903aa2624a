//! Working precision, a small complex type over MPFR floats, and series and
//! products truncated by a geometric tail bound rather than a fixed term count.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};

use crate::error::{Error, Result};

pub const DEFAULT_BITS: u32 = 256;
pub const DEFAULT_GUARD: u32 = 32;
pub const MIN_BITS: u32 = 64;

/// Hard ceiling on the number of terms any tail-bounded loop may consume.
pub const MAX_TERMS: usize = 2_000_000;

/// Arbitrary-precision real scalar.
pub type BigReal = Float;

/// Working precision: `bits` of output precision plus `guard` bits carried internally.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    bits: u32,
    guard: u32,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext { bits: DEFAULT_BITS, guard: DEFAULT_GUARD }
    }
}

impl PrecisionContext {
    pub fn new(bits: u32, guard: u32) -> Result<Self> {
        if bits < MIN_BITS {
            return Err(Error::PrecisionTooLow { got: bits, need: MIN_BITS });
        }
        Ok(PrecisionContext { bits, guard })
    }

    /// Context with the default guard.
    pub fn with_bits(bits: u32) -> Result<Self> {
        Self::new(bits, DEFAULT_GUARD)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn guard(&self) -> u32 {
        self.guard
    }

    /// MPFR precision used for every intermediate quantity.
    pub fn working(&self) -> u32 {
        self.bits + self.guard
    }

    /// Number of bits the outputs are claimed correct to.
    pub fn trusted_bits(&self) -> u32 {
        self.bits.saturating_sub(self.guard)
    }

    pub fn real<T>(&self, v: T) -> BigReal
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.working(), v)
    }

    pub fn rational(&self, q: &Rational) -> BigReal {
        Float::with_val(self.working(), q)
    }

    pub fn pi(&self) -> BigReal {
        Float::with_val(self.working(), Constant::Pi)
    }

    /// `2^(-k)` at working precision.
    pub fn pow2_neg(&self, k: u32) -> BigReal {
        let one = self.real(1);
        one >> k
    }

    /// Default residual tolerance of the property checks: `2^(-bits/2)`.
    pub fn half_tolerance(&self) -> BigReal {
        self.pow2_neg(self.bits / 2)
    }

    /// A context with `extra` more output bits and the same guard.
    pub fn refined(&self, extra: u32) -> Self {
        PrecisionContext { bits: self.bits + extra, guard: self.guard }
    }
}

/// Complex number with MPFR real and imaginary parts of equal precision.
#[derive(Clone, Debug, PartialEq)]
pub struct BigComplex {
    pub re: BigReal,
    pub im: BigReal,
}

impl BigComplex {
    pub fn new(re: BigReal, im: BigReal) -> Self {
        BigComplex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        BigComplex { re: Float::new(prec), im: Float::new(prec) }
    }

    pub fn one(prec: u32) -> Self {
        BigComplex { re: Float::with_val(prec, 1), im: Float::new(prec) }
    }

    pub fn from_real(re: BigReal) -> Self {
        let im = Float::new(re.prec());
        BigComplex { re, im }
    }

    /// `i * t`.
    pub fn from_imag(im: BigReal) -> Self {
        let re = Float::new(im.prec());
        BigComplex { re, im }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        BigComplex { re: self.re.clone(), im: Float::with_val(self.prec(), -&self.im) }
    }

    pub fn norm_sqr(&self) -> BigReal {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    pub fn abs(&self) -> BigReal {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    /// `log |z|`; `-inf` at zero.
    pub fn ln_abs(&self) -> BigReal {
        self.abs().ln()
    }

    pub fn scale(&self, s: &BigReal) -> Self {
        let p = self.prec();
        BigComplex { re: Float::with_val(p, &self.re * s), im: Float::with_val(p, &self.im * s) }
    }

    /// Multiplication by `i`.
    pub fn mul_i(&self) -> Self {
        BigComplex { re: Float::with_val(self.prec(), -&self.im), im: self.re.clone() }
    }

    pub fn recip(&self) -> Self {
        let p = self.prec();
        let n = self.norm_sqr();
        BigComplex { re: Float::with_val(p, &self.re / &n), im: Float::with_val(p, -Float::with_val(p, &self.im / &n)) }
    }

    pub fn div(&self, other: &BigComplex) -> Self {
        self * &other.recip()
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        let m = Float::with_val(p, self.re.exp_ref());
        let (s, c) = self.im.clone().sin_cos(Float::new(p));
        BigComplex { re: Float::with_val(p, &m * &c), im: m * s }
    }

    /// `exp(2*pi*i*self)`.
    pub fn exp_2pi_i(&self) -> Self {
        let p = self.prec();
        let two_pi = Float::with_val(p, Constant::Pi) * 2u32;
        BigComplex::from_imag(two_pi).mul_ref(self).exp()
    }

    pub fn mul_ref(&self, o: &BigComplex) -> Self {
        let p = self.prec();
        let ac = Float::with_val(p, &self.re * &o.re);
        let bd = Float::with_val(p, &self.im * &o.im);
        let ad = Float::with_val(p, &self.re * &o.im);
        let bc = Float::with_val(p, &self.im * &o.re);
        BigComplex { re: ac - bd, im: ad + bc }
    }

    pub fn square(&self) -> Self {
        self.mul_ref(self)
    }

    pub fn pow_u(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = BigComplex::one(self.prec());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        acc
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        if self.is_zero() {
            return BigComplex::zero(p);
        }
        let r = self.abs();
        // sqrt((r + |re|)/2) on the dominant side avoids cancellation.
        let t = Float::with_val(p, (r + Float::with_val(p, self.re.abs_ref())) / 2u32).sqrt();
        let half_im_over_t = Float::with_val(p, &self.im / &t) / 2u32;
        if self.re >= 0 {
            BigComplex { re: t, im: half_im_over_t }
        } else {
            let re = half_im_over_t.abs();
            let im = if self.im < 0 { -t } else { t };
            BigComplex { re, im }
        }
    }

    pub fn to_string_digits(&self, digits: usize) -> String {
        format!("{} + {}i", self.re.to_string_radix(10, Some(digits)), self.im.to_string_radix(10, Some(digits)))
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_digits(20))
    }
}

impl<'a> Add<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;
    fn add(self, o: &BigComplex) -> BigComplex {
        let p = self.prec();
        BigComplex { re: Float::with_val(p, &self.re + &o.re), im: Float::with_val(p, &self.im + &o.im) }
    }
}

impl<'a> Sub<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;
    fn sub(self, o: &BigComplex) -> BigComplex {
        let p = self.prec();
        BigComplex { re: Float::with_val(p, &self.re - &o.re), im: Float::with_val(p, &self.im - &o.im) }
    }
}

impl<'a> Mul<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;
    fn mul(self, o: &BigComplex) -> BigComplex {
        self.mul_ref(o)
    }
}

impl Add for BigComplex {
    type Output = BigComplex;
    fn add(self, o: BigComplex) -> BigComplex {
        &self + &o
    }
}

impl Sub for BigComplex {
    type Output = BigComplex;
    fn sub(self, o: BigComplex) -> BigComplex {
        &self - &o
    }
}

impl Mul for BigComplex {
    type Output = BigComplex;
    fn mul(self, o: BigComplex) -> BigComplex {
        self.mul_ref(&o)
    }
}

impl Neg for BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex { re: -self.re, im: -self.im }
    }
}

/// Eventually-geometric decay: `|t_{k+1}| <= ratio * |t_k|` for every `k >= from`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayCertificate {
    pub ratio: f64,
    pub from: usize,
}

impl DecayCertificate {
    pub fn new(ratio: f64, from: usize) -> Self {
        DecayCertificate { ratio, from }
    }

    fn check(&self) -> Result<()> {
        if !(self.ratio >= 0.0 && self.ratio < 1.0) {
            return Err(Error::NonConvergent(format!("certificate ratio {} is not below 1", self.ratio)));
        }
        Ok(())
    }

    /// `r / (1 - r)`, the factor turning the last term into a bound on the tail.
    fn tail_factor(&self, prec: u32) -> BigReal {
        let r = Float::with_val(prec, self.ratio);
        let denom = Float::with_val(prec, 1 - Float::with_val(prec, &r));
        r / denom
    }
}

#[derive(Clone, Debug)]
pub struct Summation {
    pub value: BigComplex,
    pub terms: usize,
    /// Bits lost to cancellation: log2 of the largest partial sum over the final sum.
    pub cancellation_bits: u32,
    /// Set when cancellation exceeded the guard bits.
    pub precision_loss: bool,
}

/// Sums `term(0) + term(1) + ...`, stopping once the geometric tail bound
/// `|t_k| r/(1-r)` falls below `2^-(bits+guard)` times the partial sum.
pub fn sum_tail_bounded<F>(mut term: F, cert: DecayCertificate, ctx: &PrecisionContext) -> Result<Summation>
where
    F: FnMut(usize) -> BigComplex,
{
    cert.check()?;
    let p = ctx.working();
    let factor = cert.tail_factor(p);
    let mut sum = BigComplex::zero(p);
    let mut peak = Float::new(p);
    let mut k = 0usize;
    loop {
        if k >= MAX_TERMS {
            return Err(Error::NonConvergent(format!("no convergence after {MAX_TERMS} terms")));
        }
        let t = term(k);
        sum = &sum + &t;
        let mag = sum.abs();
        if mag > peak {
            peak = mag.clone();
        }
        if k >= cert.from {
            let tail = t.abs() * &factor;
            let threshold = mag >> ctx.working();
            if tail <= threshold {
                break;
            }
        }
        k += 1;
    }
    let cancellation_bits = cancellation(&peak, &sum.abs());
    let precision_loss = cancellation_bits > ctx.guard();
    if precision_loss {
        log::warn!("series lost {cancellation_bits} bits to cancellation (guard is {})", ctx.guard());
    }
    Ok(Summation { value: sum, terms: k + 1, cancellation_bits, precision_loss })
}

fn cancellation(peak: &BigReal, fin: &BigReal) -> u32 {
    if peak.is_zero() || fin.is_zero() {
        return 0;
    }
    let lost = Float::with_val(64, peak / fin).log2();
    lost.to_f64().max(0.0).floor() as u32
}

/// `prod_{k >= 0} (1 + t_k)`, truncated when `2 |t_k| r/(1-r) <= 2^-(bits+guard)`,
/// which bounds the relative error of the remaining factors.
pub fn product_tail_bounded<F>(mut term: F, cert: DecayCertificate, ctx: &PrecisionContext) -> Result<(BigComplex, usize)>
where
    F: FnMut(usize) -> BigComplex,
{
    cert.check()?;
    let p = ctx.working();
    let factor = cert.tail_factor(p) * 2u32;
    let threshold = ctx.pow2_neg(ctx.working());
    let mut acc = BigComplex::one(p);
    let one = BigComplex::one(p);
    let mut k = 0usize;
    loop {
        if k >= MAX_TERMS {
            return Err(Error::NonConvergent(format!("no convergence after {MAX_TERMS} factors")));
        }
        let t = term(k);
        acc = acc.mul_ref(&(&one + &t));
        if k >= cert.from && t.abs() * &factor <= threshold {
            break;
        }
        k += 1;
    }
    Ok((acc, k + 1))
}

/// Leading binary digits on which `x` and `y` agree; `bits + guard` when equal.
pub fn agree_bits(x: &BigReal, y: &BigReal, ctx: &PrecisionContext) -> u32 {
    let full = ctx.working();
    if x == y {
        return full;
    }
    let p = ctx.working().max(x.prec()).max(y.prec());
    let diff = Float::with_val(p, x - y).abs();
    let scale = Float::with_val(p, x.abs_ref()).max(&Float::with_val(p, y.abs_ref()));
    if scale.is_zero() {
        return full;
    }
    let rel = Float::with_val(64, &diff / &scale);
    let b = -Float::with_val(64, rel.log2_ref()).to_f64();
    if b <= 0.0 {
        0
    } else {
        (b.floor() as u32).min(full)
    }
}

/// `2^e` as an MPFR float of precision `prec`, for signed `e`.
pub fn pow2(prec: u32, e: i32) -> BigReal {
    let one = Float::with_val(prec, 1);
    if e >= 0 {
        one << e as u32
    } else {
        one >> e.unsigned_abs()
    }
}

/// `log2(x)` of a positive float, as f64 (enough for tolerances and reports).
pub fn log2_f64(x: &BigReal) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    Float::with_val(64, x.abs_ref()).log2().to_f64()
}

/// Decimal rendering with `digits` significant digits; deterministic across runs.
pub fn decimal(x: &BigReal, digits: usize) -> String {
    x.to_string_radix(10, Some(digits))
}

/// Significant decimal digits that a given precision can represent.
pub fn digits_for(ctx: &PrecisionContext) -> usize {
    ((ctx.bits() as f64) * std::f64::consts::LOG10_2).floor() as usize
}

/// `x^n` for a real float and an integer exponent.
pub fn powi(x: &BigReal, n: i32) -> BigReal {
    Float::with_val(x.prec(), x.pow(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    #[test]
    fn context_rejects_low_precision() {
        assert!(matches!(PrecisionContext::with_bits(32), Err(Error::PrecisionTooLow { .. })));
        let c = PrecisionContext::with_bits(64).unwrap();
        assert_eq!(c.working(), 96);
    }

    #[test]
    fn geometric_series_sums_to_two() {
        let c = ctx();
        let p = c.working();
        let s = sum_tail_bounded(|k| BigComplex::from_real(Float::with_val(p, 1) >> k as u32), DecayCertificate::new(0.5, 0), &c).unwrap();
        let two = c.real(2);
        assert!(agree_bits(&s.value.re, &two, &c) >= c.bits());
        assert!(!s.precision_loss);
    }

    #[test]
    fn zero_terms_sum_to_zero() {
        let c = ctx();
        let s = sum_tail_bounded(|_| BigComplex::zero(c.working()), DecayCertificate::new(0.5, 0), &c).unwrap();
        assert!(s.value.is_zero());
        assert_eq!(s.terms, 1);
    }

    #[test]
    fn exponential_series_matches_mpfr_exp() {
        let c = ctx();
        let p = c.working();
        let mut fact = Float::with_val(p, 1);
        let s = sum_tail_bounded(
            |k| {
                if k > 0 {
                    fact *= k as u32;
                }
                BigComplex::from_real(Float::with_val(p, 1) / &fact)
            },
            DecayCertificate::new(0.5, 1),
            &c,
        )
        .unwrap();
        let e = c.real(1).exp();
        assert!(agree_bits(&s.value.re, &e, &c) >= c.bits());
    }

    #[test]
    fn ratio_at_least_one_is_rejected() {
        let c = ctx();
        let r = sum_tail_bounded(|_| BigComplex::one(c.working()), DecayCertificate::new(1.0, 0), &c);
        assert!(matches!(r, Err(Error::NonConvergent(_))));
    }

    #[test]
    fn cancellation_is_reported() {
        let c = PrecisionContext::new(64, 8).unwrap();
        let p = c.working();
        // 2^40 - 2^40 + 2^-k: the final sum is tiny relative to the peak.
        let s = sum_tail_bounded(
            |k| {
                let v = match k {
                    0 => Float::with_val(p, 1) << 40u32,
                    1 => -(Float::with_val(p, 1) << 40u32),
                    _ => Float::with_val(p, 1) >> (k as u32),
                };
                BigComplex::from_real(v)
            },
            DecayCertificate::new(0.5, 2),
            &c,
        )
        .unwrap();
        assert!(s.precision_loss);
        assert!(s.cancellation_bits >= 40);
    }

    #[test]
    fn agree_bits_examples() {
        let c = ctx();
        assert_eq!(agree_bits(&c.real(1), &c.real(1), &c), c.bits() + c.guard());
        assert_eq!(agree_bits(&c.real(1), &c.real(1.5), &c), 1);
    }

    fn arctan_inv(n: u32, c: &PrecisionContext) -> BigReal {
        // arctan(1/n) = sum (-1)^k / ((2k+1) n^(2k+1))
        let p = c.working();
        let n2 = Float::with_val(p, n * n);
        let mut pw = Float::with_val(p, n);
        let s = sum_tail_bounded(
            |k| {
                if k > 0 {
                    pw *= &n2;
                }
                let mut t = Float::with_val(p, 1) / (Float::with_val(p, 2 * k as u32 + 1) * &pw);
                if k % 2 == 1 {
                    t = -t;
                }
                BigComplex::from_real(t)
            },
            DecayCertificate::new(1.0 / (n * n) as f64, 0),
            c,
        )
        .unwrap();
        s.value.re
    }

    #[test]
    fn pi_two_independent_series_agree() {
        let c = ctx();
        let p = c.working();
        // Machin: pi = 16 atan(1/5) - 4 atan(1/239)
        let machin = arctan_inv(5, &c) * 16u32 - arctan_inv(239, &c) * 4u32;
        // Bailey-Borwein-Plouffe
        let mut sixteen = Float::with_val(p, 1);
        let bbp = sum_tail_bounded(
            |k| {
                if k > 0 {
                    sixteen *= 16u32;
                }
                let k8 = 8 * k as u32;
                let t =
                    Float::with_val(p, 4) / (k8 + 1) - Float::with_val(p, 2) / (k8 + 4) - Float::with_val(p, 1) / (k8 + 5) - Float::with_val(p, 1) / (k8 + 6);
                BigComplex::from_real(t / &sixteen)
            },
            DecayCertificate::new(1.0 / 8.0, 1),
            &c,
        )
        .unwrap()
        .value
        .re;
        assert!(agree_bits(&machin, &bbp, &c) >= 224);
        assert!(agree_bits(&machin, &c.pi(), &c) >= 224);
    }

    #[test]
    fn product_of_one_plus_geometric_terms() {
        // prod_{k>=1} (1 + 2^-k) vs exp(sum log(1 + 2^-k)) is circular; use
        // prod_{k>=0} (1 + x^(2^k)) = 1/(1-x) at x = 1/3.
        let c = ctx();
        let p = c.working();
        let x = Float::with_val(p, 1) / 3u32;
        let mut cur = x.clone();
        let (v, _) = product_tail_bounded(
            |k| {
                if k > 0 {
                    cur = Float::with_val(p, cur.square_ref());
                }
                BigComplex::from_real(cur.clone())
            },
            DecayCertificate::new(1.0 / 3.0, 0),
            &c,
        )
        .unwrap();
        let expect = Float::with_val(p, 3) / 2u32;
        assert!(agree_bits(&v.re, &expect, &c) >= c.bits());
    }

    #[test]
    fn complex_sqrt_is_principal() {
        let c = ctx();
        let p = c.working();
        let z = BigComplex::new(Float::with_val(p, -4), Float::with_val(p, 0));
        let r = z.sqrt();
        assert!(r.re.is_zero());
        assert_eq!(r.im, 2);
        let w = BigComplex::new(Float::with_val(p, -3), Float::with_val(p, -4));
        let r = w.sqrt();
        // sqrt(-3 - 4i) = 1 - 2i
        assert_eq!(r.re, 1);
        assert_eq!(r.im, -2);
    }

    #[test]
    fn repeated_evaluation_is_bit_identical() {
        let c = ctx();
        let a = arctan_inv(7, &c);
        let b = arctan_inv(7, &c);
        assert_eq!(a.to_string_radix(16, None), b.to_string_radix(16, None));
    }
}
