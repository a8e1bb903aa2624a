//! The lattice `Z + Z tau`: exact points of the upper half-plane, reduction
//! to the fundamental domain, torus coordinates, torsion points and the
//! quasi-periods of the Weierstrass zeta function.
//!
//! `tau` is stored exactly as `re + i sqrt(im_sq)` with both `re` and `im_sq`
//! rational. This covers every decimal input and every imaginary quadratic
//! point, and it is closed under the action of `SL2(Z)`, so reduction is exact.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::numerics::{sum_tail_bounded, BigComplex, BigReal, DecayCertificate, PrecisionContext};

/// A point of the upper half-plane, `re + i * sqrt(im_sq)` with `im_sq > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tau {
    re: Rational,
    im_sq: Rational,
}

impl Tau {
    /// `re + i * im` with rational `im > 0`.
    pub fn new(re: Rational, im: Rational) -> Result<Self> {
        if im <= 0 {
            return Err(Error::InvalidInput(format!("Im(tau) = {im} is not positive")));
        }
        Ok(Tau { re, im_sq: im.square() })
    }

    /// `re + i * sqrt(im_sq)`.
    pub fn quadratic(re: Rational, im_sq: Rational) -> Result<Self> {
        if im_sq <= 0 {
            return Err(Error::InvalidInput(format!("Im(tau)^2 = {im_sq} is not positive")));
        }
        Ok(Tau { re, im_sq })
    }

    pub fn i() -> Self {
        Tau { re: Rational::new(), im_sq: Rational::from(1) }
    }

    pub fn two_i() -> Self {
        Tau { re: Rational::new(), im_sq: Rational::from(4) }
    }

    /// `exp(pi i / 3) = (1 + i sqrt 3)/2`.
    pub fn rho() -> Self {
        Tau { re: Rational::from((1, 2)), im_sq: Rational::from((3, 4)) }
    }

    pub fn re(&self) -> &Rational {
        &self.re
    }

    pub fn im_sq(&self) -> &Rational {
        &self.im_sq
    }

    /// `|tau|^2`, exact.
    pub fn abs_sq(&self) -> Rational {
        Rational::from(self.re.square_ref()) + &self.im_sq
    }

    pub fn im(&self, ctx: &PrecisionContext) -> BigReal {
        ctx.rational(&self.im_sq).sqrt()
    }

    pub fn im_f64(&self) -> f64 {
        self.im_sq.to_f64().sqrt()
    }

    pub fn re_f64(&self) -> f64 {
        self.re.to_f64()
    }

    pub fn value(&self, ctx: &PrecisionContext) -> BigComplex {
        BigComplex::new(ctx.rational(&self.re), self.im(ctx))
    }

    /// `q = exp(2 pi i tau)`.
    pub fn nome(&self, ctx: &PrecisionContext) -> BigComplex {
        self.value(ctx).exp_2pi_i()
    }

    /// `|q| = exp(-2 pi Im tau)` as f64, for decay certificates.
    pub fn nome_abs_f64(&self) -> f64 {
        (-2.0 * std::f64::consts::PI * self.im_f64()).exp()
    }

    /// The image `(a tau + b)/(c tau + d)`, computed exactly.
    pub fn apply(&self, m: &UnimodularMatrix) -> Tau {
        let (a, b, c, d) = (m.a, m.b, m.c, m.d);
        // |c tau + d|^2 = (c x + d)^2 + c^2 y^2
        let cx_d = Rational::from(&self.re * c) + d;
        let denom = Rational::from(cx_d.square_ref()) + Rational::from(&self.im_sq * (c * c));
        let ax_b = Rational::from(&self.re * a) + b;
        let num_re = Rational::from(&ax_b * &cx_d) + Rational::from(&self.im_sq * (a * c));
        let re = num_re / &denom;
        let im_sq = &self.im_sq / denom.square();
        Tau { re, im_sq }
    }

    /// `c tau + d` at working precision.
    pub fn automorphy_factor(&self, m: &UnimodularMatrix, ctx: &PrecisionContext) -> BigComplex {
        let t = self.value(ctx);
        let p = ctx.working();
        BigComplex::new(Float::with_val(p, &t.re * m.c) + m.d, Float::with_val(p, &t.im * m.c))
    }

    pub fn is_reduced(&self) -> bool {
        let half = Rational::from((1, 2));
        Rational::from(self.re.abs_ref()) <= half && self.abs_sq() >= 1
    }

    /// Parses `i`, `2i`, `rho`, or `re,im` where each part is an integer,
    /// fraction or decimal; the imaginary part may also be `sqrt(r)` or `sqrt(r)/k`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "i" => return Ok(Tau::i()),
            "2i" => return Ok(Tau::two_i()),
            "rho" => return Ok(Tau::rho()),
            _ => {}
        }
        let (re, im) = s.split_once(',').ok_or_else(|| Error::InvalidInput(format!("tau must be 're,im' or a preset, got '{s}'")))?;
        let re = parse_rational(re)?;
        let im = im.trim();
        if let Some(rest) = im.strip_prefix("sqrt(") {
            let (inner, tail) = rest.split_once(')').ok_or_else(|| Error::InvalidInput(format!("unbalanced sqrt in '{im}'")))?;
            let mut im_sq = parse_rational(inner)?;
            if let Some(k) = tail.strip_prefix('/') {
                let k = parse_rational(k)?;
                if k == 0 {
                    return Err(Error::InvalidInput("division by zero in Im(tau)".into()));
                }
                im_sq /= k.square();
            } else if !tail.trim().is_empty() {
                return Err(Error::InvalidInput(format!("unexpected '{tail}' after sqrt(...)")));
            }
            Tau::quadratic(re, im_sq)
        } else {
            Tau::new(re, parse_rational(im)?)
        }
    }
}

impl FromStr for Tau {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Tau::parse(s)
    }
}

impl fmt::Display for Tau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = (self.im_sq.numer(), self.im_sq.denom());
        if n.is_perfect_square() && d.is_perfect_square() {
            let im = Rational::from((Integer::from(n.sqrt_ref()), Integer::from(d.sqrt_ref())));
            write!(f, "{},{}", self.re, im)
        } else {
            write!(f, "{},sqrt({})", self.re, self.im_sq)
        }
    }
}

/// Parses an integer, a fraction `p/q`, or a decimal such as `-0.25` or `1e-6`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("cannot parse '{s}' as a rational number"));
    if s.is_empty() {
        return Err(bad());
    }
    if s.contains('/') {
        let q = Rational::from_str(s).map_err(|_| bad())?;
        return Ok(q);
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num = Integer::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = Integer::from(10);
    let mut q = if scale >= 0 { Rational::from(num * ten.pow(scale as u32)) } else { Rational::from((num, ten.pow(scale.unsigned_abs()))) };
    if neg {
        q = -q;
    }
    Ok(q)
}

/// `[[a, b], [c, d]]` with determinant one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UnimodularMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl UnimodularMatrix {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if (a as i128) * (d as i128) - (b as i128) * (c as i128) != 1 {
            return Err(Error::InvalidInput(format!("det [[{a},{b}],[{c},{d}]] != 1")));
        }
        Ok(UnimodularMatrix { a, b, c, d })
    }

    pub fn identity() -> Self {
        UnimodularMatrix { a: 1, b: 0, c: 0, d: 1 }
    }

    /// `tau -> -1/tau`.
    pub fn s() -> Self {
        UnimodularMatrix { a: 0, b: -1, c: 1, d: 0 }
    }

    /// `tau -> tau + k`.
    pub fn t(k: i64) -> Self {
        UnimodularMatrix { a: 1, b: k, c: 0, d: 1 }
    }

    /// Matrix product `self * other` (apply `other` first).
    pub fn compose(&self, o: &UnimodularMatrix) -> Self {
        UnimodularMatrix { a: self.a * o.a + self.b * o.c, b: self.a * o.b + self.b * o.d, c: self.c * o.a + self.d * o.c, d: self.c * o.b + self.d * o.d }
    }

    pub fn inverse(&self) -> Self {
        UnimodularMatrix { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }
}

impl fmt::Display for UnimodularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

impl FromStr for UnimodularMatrix {
    type Err = Error;
    /// `a,b,c,d`, or one of `I`, `S`, `T`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "I" | "id" => return Ok(Self::identity()),
            "S" => return Ok(Self::s()),
            "T" => return Ok(Self::t(1)),
            _ => {}
        }
        let parts: Vec<i64> = s
            .split(',')
            .map(|p| p.trim().parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidInput(format!("matrix must be 'a,b,c,d', got '{s}'")))?;
        if parts.len() != 4 {
            return Err(Error::InvalidInput(format!("matrix must have 4 entries, got '{s}'")));
        }
        Self::new(parts[0], parts[1], parts[2], parts[3])
    }
}

/// Moves `tau` into `|Re| <= 1/2, |tau| >= 1`. Returns the reduced point and
/// the matrix `M` with `M tau = tau'`.
pub fn reduce_tau(tau: &Tau) -> (Tau, UnimodularMatrix) {
    let mut cur = tau.clone();
    let mut m = UnimodularMatrix::identity();
    loop {
        // nearest integer, ties toward -inf so that Re lands in (-1/2, 1/2]
        let shift = Integer::from((&cur.re - Rational::from((1, 2))).ceil_ref());
        let shift = shift.to_i64().expect("Re(tau) out of i64 range");
        if shift != 0 {
            let t = UnimodularMatrix::t(-shift);
            cur = cur.apply(&t);
            m = t.compose(&m);
        }
        if cur.abs_sq() < 1 {
            let s = UnimodularMatrix::s();
            cur = cur.apply(&s);
            m = s.compose(&m);
        } else {
            return (cur, m);
        }
    }
}

/// A point of `C` written `a1 tau + a2`, without reduction modulo the lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlanePoint {
    pub a1: Rational,
    pub a2: Rational,
}

impl PlanePoint {
    pub fn new(a1: Rational, a2: Rational) -> Self {
        PlanePoint { a1, a2 }
    }

    pub fn reduce(&self) -> LatticeCoord {
        LatticeCoord::new(self.a1.clone(), self.a2.clone())
    }

    pub fn is_lattice_point(&self) -> bool {
        self.a1.denom() == &1 && self.a2.denom() == &1
    }

    /// `a1 tau + a2` at working precision.
    pub fn complex(&self, tau: &Tau, ctx: &PrecisionContext) -> BigComplex {
        let t = tau.value(ctx);
        let p = ctx.working();
        let a1 = ctx.rational(&self.a1);
        BigComplex::new(Float::with_val(p, &t.re * &a1) + &self.a2, Float::with_val(p, &t.im * &a1))
    }
}

impl Add for &PlanePoint {
    type Output = PlanePoint;
    fn add(self, o: &PlanePoint) -> PlanePoint {
        PlanePoint { a1: Rational::from(&self.a1 + &o.a1), a2: Rational::from(&self.a2 + &o.a2) }
    }
}

impl Sub for &PlanePoint {
    type Output = PlanePoint;
    fn sub(self, o: &PlanePoint) -> PlanePoint {
        PlanePoint { a1: Rational::from(&self.a1 - &o.a1), a2: Rational::from(&self.a2 - &o.a2) }
    }
}

impl Neg for &PlanePoint {
    type Output = PlanePoint;
    fn neg(self) -> PlanePoint {
        PlanePoint { a1: Rational::from(-&self.a1), a2: Rational::from(-&self.a2) }
    }
}

/// A point of the torus `C/(Z + Z tau)` in exact coordinates, reduced into `[0, 1)^2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeCoord {
    a1: Rational,
    a2: Rational,
}

fn frac(q: Rational) -> Rational {
    let fl = Rational::from(q.floor_ref());
    q - fl
}

impl LatticeCoord {
    pub fn new(a1: Rational, a2: Rational) -> Self {
        LatticeCoord { a1: frac(a1), a2: frac(a2) }
    }

    pub fn zero() -> Self {
        LatticeCoord { a1: Rational::new(), a2: Rational::new() }
    }

    pub fn from_ratios(p1: i64, q1: u64, p2: i64, q2: u64) -> Self {
        Self::new(Rational::from((p1, q1)), Rational::from((p2, q2)))
    }

    pub fn a1(&self) -> &Rational {
        &self.a1
    }

    pub fn a2(&self) -> &Rational {
        &self.a2
    }

    pub fn is_zero(&self) -> bool {
        self.a1 == 0 && self.a2 == 0
    }

    /// The representative `a1 tau + a2` with both coordinates in `[0, 1)`.
    pub fn lift(&self) -> PlanePoint {
        PlanePoint { a1: self.a1.clone(), a2: self.a2.clone() }
    }

    pub fn neg(&self) -> Self {
        Self::new(Rational::from(-&self.a1), Rational::from(-&self.a2))
    }

    pub fn add(&self, o: &LatticeCoord) -> Self {
        Self::new(Rational::from(&self.a1 + &o.a1), Rational::from(&self.a2 + &o.a2))
    }

    /// Exact order in the torus, or `None` if a coordinate is not a torsion value.
    pub fn order(&self) -> Option<Integer> {
        Some(Integer::from(self.a1.denom().lcm_ref(self.a2.denom())))
    }

    /// Parses `p1/q1,p2/q2` (decimals also accepted).
    pub fn parse(s: &str) -> Result<Self> {
        let (x, y) = s.split_once(',').ok_or_else(|| Error::InvalidInput(format!("point must be 'a1,a2', got '{s}'")))?;
        Ok(Self::new(parse_rational(x)?, parse_rational(y)?))
    }
}

impl fmt::Display for LatticeCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.a1, self.a2)
    }
}

/// Exact torsion point `(p1/q, p2/q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorsionCoord {
    pub p1: u64,
    pub p2: u64,
    pub q: u64,
}

impl TorsionCoord {
    pub fn new(p1: i64, p2: i64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidInput("torsion denominator must be positive".into()));
        }
        let qi = q as i64;
        Ok(TorsionCoord { p1: p1.rem_euclid(qi) as u64, p2: p2.rem_euclid(qi) as u64, q })
    }

    /// Exact order `q / gcd(p1, p2, q)`.
    pub fn order(&self) -> u64 {
        self.q / gcd(gcd(self.p1, self.p2), self.q)
    }

    pub fn is_zero(&self) -> bool {
        self.p1 == 0 && self.p2 == 0
    }

    pub fn coord(&self) -> LatticeCoord {
        LatticeCoord::from_ratios(self.p1 as i64, self.q, self.p2 as i64, self.q)
    }
}

impl fmt::Display for TorsionCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{},{}/{}", self.p1, self.q, self.p2, self.q)
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Coordinates of the same torus point with respect to the basis `(M tau, 1)`.
///
/// The lattice `Z + Z tau` is rescaled by `(c tau + d)^-1` onto `Z + Z M tau`;
/// `z = a1 tau + a2` maps to `z/(c tau + d) = a1' M tau + a2'` with
/// `(a1', a2') = (a1, a2) M^-1`.
pub fn transform_coord(z: &LatticeCoord, m: &UnimodularMatrix) -> LatticeCoord {
    transform_point(&z.lift(), m).reduce()
}

/// [`transform_coord`] without reduction modulo the lattice.
pub fn transform_point(z: &PlanePoint, m: &UnimodularMatrix) -> PlanePoint {
    let a1 = Rational::from(&z.a1 * m.d) - Rational::from(&z.a2 * m.c);
    let a2 = Rational::from(&z.a2 * m.a) - Rational::from(&z.a1 * m.b);
    PlanePoint { a1, a2 }
}

/// Reduces `tau` and carries `z` along, so that the pair describes the same
/// point of the same curve in a basis where the q-series converge fast.
pub fn reduce_pair(tau: &Tau, z: &LatticeCoord) -> (Tau, LatticeCoord, UnimodularMatrix) {
    let (t, m) = reduce_tau(tau);
    let z2 = transform_coord(z, &m);
    (t, z2, m)
}

/// All nonzero `n`-torsion points, ordered by `(p1, p2)`; with `primitive_only`
/// only those of exact order `n`.
pub fn torsion_points(n: u64, primitive_only: bool) -> Vec<TorsionCoord> {
    let mut out = Vec::new();
    for p1 in 0..n {
        for p2 in 0..n {
            if p1 == 0 && p2 == 0 {
                continue;
            }
            let t = TorsionCoord { p1, p2, q: n };
            if !primitive_only || t.order() == n {
                out.push(t);
            }
        }
    }
    out
}

/// `E2(tau) = 1 - 24 sum sigma_1(k) q^k` on the given basis, summed as the
/// Lambert series `1 - 24 sum k q^k/(1 - q^k)`. Needs `|q| < 1/2`; slow for small `Im tau`.
pub fn eisenstein_e2_series(tau: &Tau, ctx: &PrecisionContext) -> Result<BigComplex> {
    let qa = tau.nome_abs_f64();
    if tau.im_f64() < 0.1 {
        log::warn!("E2 q-series at Im(tau) = {} converges slowly", tau.im_f64());
    }
    if qa >= 0.5 {
        return Err(Error::NonConvergent(format!("|q| = {qa} too close to 1 for the E2 series")));
    }
    // term ratio <= ((k+1)/k) |q| / (1 - |q|) for k >= from
    let base = qa / (1.0 - qa);
    let from = (1..).find(|&k: &usize| (k as f64 + 1.0) / k as f64 * base < 0.75).unwrap();
    let ratio = ((from as f64 + 1.0) / from as f64 * base).max(base);
    let q = tau.nome(ctx);
    let p = ctx.working();
    let one = BigComplex::one(p);
    let mut qk = BigComplex::one(p);
    let s = sum_tail_bounded(
        |k| {
            if k == 0 {
                return BigComplex::zero(p);
            }
            qk = qk.mul_ref(&q);
            let lam = qk.div(&(&one - &qk));
            lam.scale(&Float::with_val(p, k as u32))
        },
        DecayCertificate::new(ratio, from),
        ctx,
    )?;
    let mut e2 = s.value.scale(&Float::with_val(p, -24));
    e2.re += 1u32;
    Ok(e2)
}

/// `E2(tau)`, evaluated on the reduced point and carried back through the
/// quasi-modular law `E2(M tau) = (c tau + d)^2 E2(tau) + 6 c (c tau + d)/(pi i)`.
pub fn eisenstein_e2(tau: &Tau, ctx: &PrecisionContext) -> Result<BigComplex> {
    let (red, m) = reduce_tau(tau);
    let e2_red = eisenstein_e2_series(&red, ctx)?;
    if m.c == 0 {
        return Ok(e2_red);
    }
    let p = ctx.working();
    let j = tau.automorphy_factor(&m, ctx);
    // 6 c j / (pi i) = -6 c j i / pi
    let corr = j.mul_i().scale(&(Float::with_val(p, -6 * m.c) / ctx.pi()));
    Ok((&e2_red - &corr).div(&j.square()))
}

/// Quasi-periods `(eta_1, eta_2) = (eta(1), eta(tau))` with `eta_1 = (pi^2/3) E2(tau)`
/// and the Legendre relation `eta_1 tau - eta_2 = 2 pi i`.
pub fn quasi_periods(tau: &Tau, ctx: &PrecisionContext) -> Result<(BigComplex, BigComplex)> {
    let p = ctx.working();
    let pi = ctx.pi();
    let e2 = eisenstein_e2(tau, ctx)?;
    let eta1 = e2.scale(&(Float::with_val(p, pi.square_ref()) / 3u32));
    let two_pi_i = BigComplex::from_imag(Float::with_val(p, &pi * 2u32));
    let eta2 = &eta1.mul_ref(&tau.value(ctx)) - &two_pi_i;
    Ok((eta1, eta2))
}

/// The R-linear quasi-period map `eta(a1 tau + a2) = a1 eta_2 + a2 eta_1`.
pub fn quasi_period(z: &PlanePoint, tau: &Tau, ctx: &PrecisionContext) -> Result<BigComplex> {
    let (eta1, eta2) = quasi_periods(tau, ctx)?;
    Ok(quasi_period_from(z, &eta1, &eta2, ctx))
}

pub(crate) fn quasi_period_from(z: &PlanePoint, eta1: &BigComplex, eta2: &BigComplex, ctx: &PrecisionContext) -> BigComplex {
    &eta2.scale(&ctx.rational(&z.a1)) + &eta1.scale(&ctx.rational(&z.a2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::agree_bits;

    fn q(n: i64, d: u64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn reduce_i_is_identity() {
        let (t, m) = reduce_tau(&Tau::i());
        assert_eq!(t, Tau::i());
        assert_eq!(m, UnimodularMatrix::identity());
    }

    #[test]
    fn reduce_translate() {
        let tau = Tau::new(Rational::from(5), Rational::from(1)).unwrap();
        let (t, m) = reduce_tau(&tau);
        assert_eq!(t, Tau::i());
        assert_eq!(m, UnimodularMatrix::t(-5));
    }

    #[test]
    fn reduce_small_tau_mobius_identity() {
        let tau = Tau::new(q(1, 10), q(1, 10)).unwrap();
        let (t, m) = reduce_tau(&tau);
        assert!(t.is_reduced());
        assert_eq!(m.det(), 1);
        assert_eq!(tau.apply(&m), t);
        // numerically too
        let ctx = PrecisionContext::default();
        let num = tau.value(&ctx);
        let p = ctx.working();
        let top = BigComplex::new(Float::with_val(p, &num.re * m.a) + m.b, Float::with_val(p, &num.im * m.a));
        let bottom = tau.automorphy_factor(&m, &ctx);
        let img = top.div(&bottom);
        let tv = t.value(&ctx);
        assert!(agree_bits(&img.re, &tv.re, &ctx) >= ctx.bits());
        assert!(agree_bits(&img.im, &tv.im, &ctx) >= ctx.bits());
    }

    #[test]
    fn reduced_nome_bound() {
        let tau = Tau::new(q(37, 100), q(3, 1000)).unwrap();
        let (t, _) = reduce_tau(&tau);
        assert!(t.nome_abs_f64() <= (-std::f64::consts::PI * 3f64.sqrt()).exp() * (1.0 + 1e-12));
    }

    #[test]
    fn transform_identity_and_zero() {
        let z = LatticeCoord::from_ratios(1, 3, 2, 7);
        assert_eq!(transform_coord(&z, &UnimodularMatrix::identity()), z);
        let m = UnimodularMatrix::new(2, 1, 1, 1).unwrap();
        assert!(transform_coord(&LatticeCoord::zero(), &m).is_zero());
    }

    #[test]
    fn transform_half_period_under_s() {
        let z = LatticeCoord::from_ratios(1, 2, 0, 1);
        let z2 = transform_coord(&z, &UnimodularMatrix::s());
        assert_eq!(z2, LatticeCoord::from_ratios(0, 1, 1, 2));
        // numeric oracle: z/(c tau + d) expressed in the basis (-1/tau, 1), mod lattice
        let ctx = PrecisionContext::default();
        let tau = Tau::two_i();
        let zc = z.lift().complex(&tau, &ctx);
        let j = tau.automorphy_factor(&UnimodularMatrix::s(), &ctx);
        let img = zc.div(&j);
        let t2 = tau.apply(&UnimodularMatrix::s());
        let expect = z2.lift().complex(&t2, &ctx);
        // difference must be a lattice vector of Z + Z t2: here it is 0
        let d = &img - &expect;
        assert!(d.abs() < ctx.pow2_neg(200));
    }

    #[test]
    fn torsion_counts() {
        assert!(torsion_points(1, false).is_empty());
        let two = torsion_points(2, false);
        assert_eq!(two.len(), 3);
        assert!(two.iter().all(|t| t.order() == 2));
        // brute-force gcd count of exact order 6
        let brute = (0..6u64).flat_map(|a| (0..6u64).map(move |b| (a, b))).filter(|&(a, b)| gcd(gcd(a, b), 6) == 1).count();
        assert_eq!(brute, 24);
        assert_eq!(torsion_points(6, true).len(), 24);
        for n in 1..9 {
            assert_eq!(torsion_points(n, false).len() as u64, n * n - 1);
        }
    }

    #[test]
    fn e2_limits_and_periodicity() {
        let ctx = PrecisionContext::default();
        let big = Tau::new(Rational::new(), Rational::from(60)).unwrap();
        let e = eisenstein_e2(&big, &ctx).unwrap();
        assert!(Float::with_val(64, &e.re - 1u32).abs() < 1e-100);
        let tau = Tau::new(q(1, 7), q(9, 10)).unwrap();
        let shifted = tau.apply(&UnimodularMatrix::t(1));
        let a = eisenstein_e2(&tau, &ctx).unwrap();
        let b = eisenstein_e2(&shifted, &ctx).unwrap();
        assert!(agree_bits(&a.re, &b.re, &ctx) >= ctx.trusted_bits());
        assert!(agree_bits(&a.im, &b.im, &ctx) >= ctx.trusted_bits());
    }

    #[test]
    fn e2_at_i_matches_lattice_sum_oracle() {
        // G2(i) with Eisenstein order: inner sum over m in closed form,
        // sum_m 1/(m + n i)^2 = pi^2 / sin^2(pi n i) = -pi^2 / sinh^2(pi n),
        // so G2(i) = pi^2/3 - 2 pi^2 sum_{n>=1} 1/sinh^2(pi n) and eta_1 = G2.
        let ctx = PrecisionContext::default();
        let p = ctx.working();
        let pi = ctx.pi();
        let pi2 = Float::with_val(p, pi.square_ref());
        let s = sum_tail_bounded(
            |k| {
                let n = k as u32 + 1;
                let sh = Float::with_val(p, &pi * n).sinh();
                BigComplex::from_real(Float::with_val(p, 1) / sh.square())
            },
            DecayCertificate::new(0.01, 0),
            &ctx,
        )
        .unwrap();
        let g2 = Float::with_val(p, &pi2 / 3u32) - Float::with_val(p, &pi2 * 2u32) * s.value.re;
        // eta_1(i) = pi  <=>  E2(i) = 3/pi
        assert!(agree_bits(&g2, &pi, &ctx) >= ctx.trusted_bits());
        let e2 = eisenstein_e2(&Tau::i(), &ctx).unwrap();
        let three_over_pi = Float::with_val(p, 3) / &pi;
        assert!(agree_bits(&e2.re, &three_over_pi, &ctx) >= ctx.trusted_bits());
        let (eta1, _) = quasi_periods(&Tau::i(), &ctx).unwrap();
        assert!(agree_bits(&eta1.re, &pi, &ctx) >= ctx.trusted_bits());
    }

    #[test]
    fn e2_cocycle_matches_series_off_fundamental_domain() {
        let ctx = PrecisionContext::default();
        let tau = Tau::new(q(3, 10), q(45, 100)).unwrap();
        let direct = eisenstein_e2_series(&tau, &ctx).unwrap();
        let via = eisenstein_e2(&tau, &ctx).unwrap();
        assert!(agree_bits(&direct.re, &via.re, &ctx) >= ctx.trusted_bits());
        assert!(agree_bits(&direct.im, &via.im, &ctx) >= ctx.trusted_bits());
    }

    #[test]
    fn quasi_period_zero_and_legendre() {
        let ctx = PrecisionContext::default();
        let tau = Tau::new(q(-2, 9), q(13, 10)).unwrap();
        let e = quasi_period(&PlanePoint::new(Rational::new(), Rational::new()), &tau, &ctx).unwrap();
        assert!(e.is_zero());
        let (eta1, eta2) = quasi_periods(&tau, &ctx).unwrap();
        let lhs = &eta1.mul_ref(&tau.value(&ctx)) - &eta2;
        let two_pi = ctx.pi() * 2u32;
        assert!(lhs.re.clone().abs() < ctx.pow2_neg(ctx.trusted_bits()));
        assert!(agree_bits(&lhs.im, &two_pi, &ctx) >= ctx.trusted_bits());
    }

    #[test]
    fn parse_forms() {
        assert_eq!(Tau::parse("0,2").unwrap(), Tau::two_i());
        assert_eq!(Tau::parse("i").unwrap(), Tau::i());
        assert_eq!(Tau::parse("1/2,sqrt(3)/2").unwrap(), Tau::rho());
        assert_eq!(Tau::parse("0.3,1.2").unwrap(), Tau::new(q(3, 10), q(6, 5)).unwrap());
        assert!(Tau::parse("0,-1").is_err());
        assert!(Tau::parse("junk").is_err());
        assert_eq!(parse_rational("1e-6").unwrap(), q(1, 1_000_000));
        assert_eq!(parse_rational("-.25").unwrap(), q(-1, 4));
        assert_eq!(LatticeCoord::parse("1/3,-1/5").unwrap(), LatticeCoord::from_ratios(1, 3, 4, 5));
        assert_eq!("S".parse::<UnimodularMatrix>().unwrap(), UnimodularMatrix::s());
        assert!("1,1,1,1".parse::<UnimodularMatrix>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for t in [Tau::i(), Tau::rho(), Tau::new(q(-3, 10), q(7, 4)).unwrap()] {
            assert_eq!(Tau::parse(&t.to_string()).unwrap(), t);
        }
    }

    #[test]
    fn torsion_coord_order() {
        let t = TorsionCoord::new(2, 4, 6).unwrap();
        assert_eq!(t.order(), 3);
        let t = TorsionCoord::new(-1, 0, 6).unwrap();
        assert_eq!((t.p1, t.order()), (5, 6));
    }
}
