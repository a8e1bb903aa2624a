//! Integer relations: exact integral LLL, recognition of algebraic numbers from
//! high-precision approximations, and the unit test for `exp(24 n phi)` at torsion points.

use std::fmt;

use rug::ops::NegAssign;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::green::phi_sigma;
use crate::lattice::{LatticeCoord, Tau, TorsionCoord};
use crate::numerics::{decimal, BigReal, PrecisionContext};

/// Lovasz constant `99/100`.
pub const LLL_DELTA: (u32, u32) = (99, 100);

/// Lowest precision accepted by [`unit_check`].
pub const UNIT_MIN_BITS: u32 = 512;

/// Integer polynomial, constant term first; the leading coefficient is nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<Integer>,
}

impl IntPolynomial {
    /// Trims trailing zeros; `None` for the zero polynomial.
    pub fn new(mut coeffs: Vec<Integer>) -> Option<Self> {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            None
        } else {
            Some(IntPolynomial { coeffs })
        }
    }

    pub fn from_i64(coeffs: &[i64]) -> Option<Self> {
        Self::new(coeffs.iter().map(|&c| Integer::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &Integer {
        self.coeffs.last().unwrap()
    }

    pub fn constant(&self) -> &Integer {
        &self.coeffs[0]
    }

    pub fn content(&self) -> Integer {
        self.coeffs.iter().fold(Integer::new(), |g, c| g.gcd(c))
    }

    /// Divides out the content and makes the leading coefficient positive.
    pub fn normalized(&self) -> Self {
        let mut g = self.content();
        if *self.leading() < 0 {
            g.neg_assign();
        }
        IntPolynomial { coeffs: self.coeffs.iter().map(|c| Integer::from(c / &g)).collect() }
    }

    pub fn norm1(&self) -> Integer {
        self.coeffs.iter().fold(Integer::new(), |s, c| s + c.clone().abs())
    }

    /// Horner evaluation at the precision of `x`.
    pub fn eval(&self, x: &BigReal) -> BigReal {
        let p = x.prec();
        let mut acc = Float::new(p);
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn eval_rational(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let neg = *c < 0;
            let a = Integer::from(c.abs_ref());
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let mono = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            if i == 0 || a != 1 {
                write!(f, "{a}")?;
                if i > 0 {
                    f.write_str("*")?;
                }
            }
            f.write_str(&mono)?;
        }
        Ok(())
    }
}

fn dot(a: &[Integer], b: &[Integer]) -> Integer {
    a.iter().zip(b).fold(Integer::new(), |s, (x, y)| s + Integer::from(x * y))
}

/// Rounds `a / b` to the nearest integer (`b > 0`), ties away from zero.
fn round_div(a: &Integer, b: &Integer) -> Integer {
    let two_a = Integer::from(a * 2u32);
    let two_b = Integer::from(b * 2u32);
    let (q, _) = (two_a + b).div_rem_floor(two_b);
    q
}

/// Integral LLL reduction with `delta = 99/100`, exact throughout: Gram-Schmidt data kept
/// as the integers `d_i` and `lambda_ij = d_j mu_ij`.
pub fn lll_reduce(basis: &[Vec<Integer>]) -> Result<Vec<Vec<Integer>>> {
    let n = basis.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let dim = basis[0].len();
    if basis.iter().any(|r| r.len() != dim) {
        return Err(Error::InvalidInput("basis rows have different lengths".into()));
    }
    let (num, den) = LLL_DELTA;
    // 1-based indices as in the textbook formulation; slot 0 unused for b and lam
    let mut b: Vec<Vec<Integer>> = std::iter::once(Vec::new()).chain(basis.iter().cloned()).collect();
    let mut d = vec![Integer::new(); n + 1];
    let mut lam = vec![vec![Integer::new(); n + 1]; n + 1];
    d[0] = Integer::from(1);
    d[1] = dot(&b[1], &b[1]);
    if d[1] == 0 {
        return Err(Error::DependentRows);
    }
    let mut k = 2usize;
    let mut k_max = 1usize;
    while k <= n {
        if k > k_max {
            k_max = k;
            for j in 1..=k {
                let mut u = dot(&b[k], &b[j]);
                for i in 1..j {
                    u = (Integer::from(&d[i] * &u) - Integer::from(&lam[k][i] * &lam[j][i])) / &d[i - 1];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    if u == 0 {
                        return Err(Error::DependentRows);
                    }
                    d[k] = u;
                }
            }
        }
        loop {
            size_reduce(&mut b, &mut lam, &d, k, k - 1);
            let lhs = Integer::from(&d[k] * &d[k - 2]) * den;
            let rhs = Integer::from(d[k - 1].square_ref()) * num - Integer::from(lam[k][k - 1].square_ref()) * den;
            if lhs < rhs {
                swap(&mut b, &mut lam, &mut d, k, k_max);
                k = (k - 1).max(2);
            } else {
                for l in (1..k - 1).rev() {
                    size_reduce(&mut b, &mut lam, &d, k, l);
                }
                k += 1;
                break;
            }
        }
    }
    b.remove(0);
    Ok(b)
}

#[allow(clippy::needless_range_loop)]
fn size_reduce(b: &mut [Vec<Integer>], lam: &mut [Vec<Integer>], d: &[Integer], k: usize, l: usize) {
    let two_lam = Integer::from(lam[k][l].abs_ref()) * 2u32;
    if two_lam <= d[l] {
        return;
    }
    let q = round_div(&lam[k][l], &d[l]);
    let bl = b[l].clone();
    for (x, y) in b[k].iter_mut().zip(&bl) {
        *x -= Integer::from(&q * y);
    }
    lam[k][l] -= Integer::from(&q * &d[l]);
    for i in 1..l {
        let t = Integer::from(&q * &lam[l][i]);
        lam[k][i] -= t;
    }
}

#[allow(clippy::needless_range_loop)]
fn swap(b: &mut [Vec<Integer>], lam: &mut [Vec<Integer>], d: &mut [Integer], k: usize, k_max: usize) {
    b.swap(k, k - 1);
    for j in 1..k - 1 {
        let t = lam[k][j].clone();
        lam[k][j] = lam[k - 1][j].clone();
        lam[k - 1][j] = t;
    }
    let l = lam[k][k - 1].clone();
    let big_b = (Integer::from(&d[k - 2] * &d[k]) + Integer::from(l.square_ref())) / &d[k - 1];
    for i in k + 1..=k_max {
        let t = lam[i][k].clone();
        lam[i][k] = (Integer::from(&d[k] * &lam[i][k - 1]) - Integer::from(&l * &t)) / &d[k - 1];
        lam[i][k - 1] = (Integer::from(&big_b * &t) + Integer::from(&l * &lam[i][k])) / &d[k];
    }
    d[k - 1] = big_b;
}

/// Exact check of size reduction (`|mu_ij| <= 1/2`) and the Lovasz condition with `delta = 99/100`,
/// by rational Gram-Schmidt.
pub fn is_lll_reduced(basis: &[Vec<Integer>]) -> bool {
    let n = basis.len();
    let rows: Vec<Vec<Rational>> = basis.iter().map(|r| r.iter().map(Rational::from).collect()).collect();
    let mut star: Vec<Vec<Rational>> = Vec::with_capacity(n);
    let mut norms: Vec<Rational> = Vec::with_capacity(n);
    let half = Rational::from((1, 2));
    let delta = Rational::from((LLL_DELTA.0, LLL_DELTA.1));
    for i in 0..n {
        let mut v = rows[i].clone();
        let mut mu_prev = Rational::new();
        for j in 0..i {
            if norms[j] == 0 {
                return false;
            }
            let num = rows[i].iter().zip(&star[j]).fold(Rational::new(), |s, (a, b)| s + Rational::from(a * b));
            let mu = num / &norms[j];
            if Rational::from(mu.abs_ref()) > half {
                return false;
            }
            for (x, y) in v.iter_mut().zip(&star[j]) {
                *x -= Rational::from(&mu * y);
            }
            if j + 1 == i {
                mu_prev = mu;
            }
        }
        let nv = v.iter().fold(Rational::new(), |s, a| s + Rational::from(a.square_ref()));
        if i > 0 {
            let bound = (delta.clone() - Rational::from(mu_prev.square_ref())) * &norms[i - 1];
            if nv < bound {
                return false;
            }
        }
        star.push(v);
        norms.push(nv);
    }
    true
}

/// Best relation of degree `<= maxdeg` for `x` at the precision of `ctx`, or `None`.
///
/// For each degree `d = 1..maxdeg` the rows `[e_i | round(x^i 2^(B - e))]`, with
/// `B = bits - 2 guard` and `2^e >= max(1, |x|)^d`, are LLL-reduced and the first row
/// read as a polynomial. It is kept only if `|P(x)| <= 2^-(B + guard/2) sum |c_i| |x|^i`:
/// relations manufactured by the reduction hold only to about `2^-B` on that scale,
/// while a true relation holds to the accuracy of `x`.
pub fn algdep_candidate(x: &BigReal, maxdeg: usize, ctx: &PrecisionContext) -> Option<IntPolynomial> {
    let p = ctx.working();
    let x = Float::with_val(p, x);
    if x.is_zero() {
        return IntPolynomial::from_i64(&[0, 1]);
    }
    let big_b = ctx.bits().saturating_sub(2 * ctx.guard()) as i64;
    let lx = Float::with_val(64, x.abs_ref()).log2().to_f64().max(0.0);
    for d in 1..=maxdeg.max(1) {
        let e = (d as f64 * lx).ceil() as i64 + 1;
        let shift = big_b - e;
        if shift < 16 {
            log::debug!("algdep: |x|^{d} leaves no room at {} bits", ctx.bits());
            break;
        }
        let mut rows = Vec::with_capacity(d + 1);
        let mut xi = Float::with_val(p, 1);
        for i in 0..=d {
            let mut r = vec![Integer::new(); d + 2];
            r[i] = Integer::from(1);
            let scaled = Float::with_val(p, &xi << shift as u32);
            r[d + 1] = scaled.round().to_integer().unwrap_or_default();
            rows.push(r);
            xi *= &x;
        }
        let red = match lll_reduce(&rows) {
            Ok(r) => r,
            Err(_) => continue,
        };
        let Some(poly) = IntPolynomial::new(red[0][..=d].to_vec()).map(|q| q.normalized()) else {
            continue;
        };
        if poly.degree() == 0 {
            continue;
        }
        if passes_gate(&poly, &x, big_b, ctx) {
            return Some(poly);
        }
    }
    None
}

fn passes_gate(poly: &IntPolynomial, x: &BigReal, big_b: i64, ctx: &PrecisionContext) -> bool {
    let p = ctx.working();
    let val = Float::with_val(p, poly.eval(x).abs_ref());
    let bound = weighted_norm(poly, x) * crate::numerics::pow2(p, -(big_b as i32) - (ctx.guard() / 2) as i32);
    val <= bound
}

/// `sum |c_i| |x|^i`, the scale against which `|P(x)|` is judged.
fn weighted_norm(poly: &IntPolynomial, x: &BigReal) -> BigReal {
    let p = x.prec();
    let ax = Float::with_val(p, x.abs_ref());
    let mut acc = Float::new(p);
    for c in poly.coeffs().iter().rev() {
        acc *= &ax;
        acc += Integer::from(c.abs_ref());
    }
    acc
}

/// Recognition that must replicate: `value(ctx)` and `value(ctx_hi)` must yield the same polynomial.
pub fn algdep<F>(mut value: F, maxdeg: usize, ctx: &PrecisionContext, ctx_hi: &PrecisionContext) -> Result<Option<IntPolynomial>>
where
    F: FnMut(&PrecisionContext) -> Result<BigReal>,
{
    let lo = algdep_candidate(&value(ctx)?, maxdeg, ctx);
    let Some(lo) = lo else { return Ok(None) };
    let hi = algdep_candidate(&value(ctx_hi)?, maxdeg, ctx_hi);
    if hi.as_ref() == Some(&lo) {
        Ok(Some(lo))
    } else {
        log::info!("algdep candidate {lo} did not replicate at {} bits", ctx_hi.bits());
        Ok(None)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Unit,
    /// Leading and constant coefficients are supported on primes dividing `n`.
    UnitAwayFromN,
    Unrecognized,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Unit => "unit",
            Verdict::UnitAwayFromN => "unit_away_from_n",
            Verdict::Unrecognized => "unrecognized",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Multiplier in front of `n phi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum UnitExponent {
    #[default]
    TwentyFour,
    Twelve,
}

impl UnitExponent {
    pub fn factor(&self) -> u64 {
        match self {
            UnitExponent::TwentyFour => 24,
            UnitExponent::Twelve => 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitReport {
    pub tau: Tau,
    pub point: LatticeCoord,
    pub order: u64,
    /// `factor * n`.
    pub exponent: u64,
    pub value: BigReal,
    pub polynomial: Option<IntPolynomial>,
    pub constant_abs: Option<Integer>,
    pub leading_abs: Option<Integer>,
    /// `|P(value)|` at working precision.
    pub residual: Option<BigReal>,
    pub verdict: Verdict,
    pub bits: u32,
    pub replication_bits: u32,
}

impl UnitReport {
    pub fn value_str(&self) -> String {
        decimal(&self.value, 40)
    }
}

/// Options of [`unit_check`].
#[derive(Clone, Debug, Default)]
pub struct UnitOptions {
    pub exponent: UnitExponent,
    /// Precision of the replication run; `2 * bits` when unset.
    pub replication_bits: Option<u32>,
}

/// `true` when `x` has no prime factor outside those of `n`.
fn supported_on(x: &Integer, n: u64) -> bool {
    if *x == 0 {
        return false;
    }
    let mut r = Integer::from(x.abs_ref());
    for p in crate::arith::prime_factors(n) {
        let pi = Integer::from(p);
        while r.is_divisible(&pi) {
            r /= &pi;
        }
    }
    r == 1
}

/// Computes `v = exp(factor * n * phi(a, tau))` and grades it by the polynomial algdep finds.
pub fn unit_check(tau: &Tau, a: &TorsionCoord, maxdeg: usize, opts: &UnitOptions, ctx: &PrecisionContext) -> Result<UnitReport> {
    if ctx.bits() < UNIT_MIN_BITS {
        return Err(Error::PrecisionTooLow { got: ctx.bits(), need: UNIT_MIN_BITS });
    }
    if a.is_zero() {
        return Err(Error::ZeroPoint);
    }
    let n = a.order();
    let z = a.coord();
    let exponent = opts.exponent.factor() * n;
    let hi_bits = opts.replication_bits.unwrap_or(2 * ctx.bits());
    if hi_bits <= ctx.bits() {
        return Err(Error::InvalidInput(format!("replication precision {hi_bits} must exceed {}", ctx.bits())));
    }
    let ctx_hi = PrecisionContext::new(hi_bits, ctx.guard())?;
    let value_at = |c: &PrecisionContext| -> Result<BigReal> {
        let g = phi_sigma(&z, tau, c)?;
        Ok((g.value * exponent).exp())
    };
    let value = value_at(ctx)?;
    let poly = algdep(value_at, maxdeg, ctx, &ctx_hi)?;
    let (constant_abs, leading_abs, residual, verdict) = match &poly {
        None => (None, None, None, Verdict::Unrecognized),
        Some(pl) => {
            let c = Integer::from(pl.constant().abs_ref());
            let l = Integer::from(pl.leading().abs_ref());
            let r = Float::with_val(ctx.working(), pl.eval(&value).abs_ref());
            let v = if c == 1 && l == 1 {
                Verdict::Unit
            } else if supported_on(&c, n) && supported_on(&l, n) {
                Verdict::UnitAwayFromN
            } else {
                Verdict::Unrecognized
            };
            (Some(c), Some(l), Some(r), v)
        }
    };
    Ok(UnitReport {
        tau: tau.clone(),
        point: z,
        order: n,
        exponent,
        value,
        polynomial: poly,
        constant_abs,
        leading_abs,
        residual,
        verdict,
        bits: ctx.bits(),
        replication_bits: hi_bits,
    })
}

/// Torsion point used by the presets for each order: `(1/6, 1/6)` for 6, `(1/n, 0)` otherwise.
pub fn preset_point(order: u64) -> Result<TorsionCoord> {
    match order {
        0 | 1 => Err(Error::InvalidInput(format!("order must be at least 2, got {order}"))),
        6 => TorsionCoord::new(1, 1, 6),
        n => TorsionCoord::new(1, 0, n),
    }
}
