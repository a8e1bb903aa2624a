//! The canonical Green function of a complex torus `C/(Z + Z tau)`:
//! `phi(z) = -2 log(|Klein form(z)| |Delta|^(1/12))`, with a `-2 log|z|` pole at
//! the origin and zero mean against Haar measure.
//!
//! Three evaluators that share no series code:
//! - `Sigma`: Weierstrass sigma, quasi-periods and Dedekind eta;
//! - `Siegel`: the product formula of the Siegel function;
//! - `Kronecker`: the s = 1 value of a twisted real-analytic Eisenstein series,
//!   accelerated with incomplete gamma functions.

use std::fmt;
use std::str::FromStr;

use rug::{Float, Rational};

use crate::elliptic::{delta_twelfth_root_in_basis, klein_form_at, q_product};
use crate::error::{Error, Result};
use crate::lattice::{reduce_pair, reduce_tau, torsion_points, transform_coord, LatticeCoord, PlanePoint, Tau, UnimodularMatrix};
use crate::numerics::{BigComplex, BigReal, PrecisionContext};
use crate::report::CheckReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Sigma,
    Siegel,
    Kronecker,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Sigma, Method::Siegel, Method::Kronecker];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Sigma => "sigma",
            Method::Siegel => "siegel",
            Method::Kronecker => "kronecker",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigma" => Ok(Method::Sigma),
            "siegel" => Ok(Method::Siegel),
            "kronecker" => Ok(Method::Kronecker),
            _ => Err(Error::InvalidInput(format!("unknown method '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreenValue {
    pub value: BigReal,
    pub method: Method,
    /// `2^-(bits - guard) * max(1, |value|)`.
    pub est_error: BigReal,
}

impl GreenValue {
    fn new(value: BigReal, method: Method, ctx: &PrecisionContext) -> Self {
        let mag = Float::with_val(ctx.working(), value.abs_ref()).max(&ctx.real(1));
        let est_error = mag * ctx.pow2_neg(ctx.trusted_bits());
        GreenValue { value, method, est_error }
    }
}

/// Evaluates `phi` by the chosen method.
pub fn phi(method: Method, z: &LatticeCoord, tau: &Tau, ctx: &PrecisionContext) -> Result<GreenValue> {
    match method {
        Method::Sigma => phi_sigma(z, tau, ctx),
        Method::Siegel => phi_siegel(z, tau, ctx),
        Method::Kronecker => phi_kronecker(z, tau, ctx),
    }
}

/// `phi` from the Klein form and `Delta^(1/12)`, after reducing `(tau, z)` jointly.
pub fn phi_sigma(z: &LatticeCoord, tau: &Tau, ctx: &PrecisionContext) -> Result<GreenValue> {
    if z.is_zero() {
        return Err(Error::ZeroPoint);
    }
    let (t, w, _) = reduce_pair(tau, z);
    let v = phi_sigma_in_basis(&w.lift(), &t, ctx)?;
    Ok(GreenValue::new(v, Method::Sigma, ctx))
}

/// The sigma path on the given basis and lift, without any reduction.
pub fn phi_sigma_in_basis(z: &PlanePoint, tau: &Tau, ctx: &PrecisionContext) -> Result<BigReal> {
    let k = klein_form_at(z, tau, ctx)?;
    let d = delta_twelfth_root_in_basis(tau, ctx)?;
    Ok((k.ln_abs() + d.ln_abs()) * -2i32)
}

/// Sigma path with `Delta` replaced by `factor * Delta`. Only for fault injection:
/// the result shifts by `-log(factor)/6`, which the distribution relation detects.
pub fn phi_sigma_with_delta_factor(z: &LatticeCoord, tau: &Tau, factor: &BigReal, ctx: &PrecisionContext) -> Result<GreenValue> {
    let g = phi_sigma(z, tau, ctx)?;
    let shift = Float::with_val(ctx.working(), factor.ln_ref()) / 6u32;
    Ok(GreenValue::new(g.value - shift, Method::Sigma, ctx))
}

/// `B2(x) = x^2 - x + 1/6`, exact.
pub fn siegel_b2(x: &Rational) -> Rational {
    Rational::from(x.square_ref()) - x + Rational::from((1, 6))
}

/// `phi = -2 log|g_a(tau)|` from the Siegel product
/// `|g_a| = |q|^(B2(a1)/2) |1 - q_z| prod |1 - q^k q_z| |1 - q^k / q_z|`.
pub fn phi_siegel(z: &LatticeCoord, tau: &Tau, ctx: &PrecisionContext) -> Result<GreenValue> {
    if z.is_zero() {
        return Err(Error::ZeroPoint);
    }
    let (t, w, _) = reduce_pair(tau, z);
    let p = ctx.working();
    let y = t.im(ctx);
    let q = t.nome(ctx);
    let qz = w.lift().complex(&t, ctx).exp_2pi_i();
    let ratio = (t.nome_abs_f64() * (1.0 + 1e-12)).max(1e-300);
    let one = BigComplex::one(p);
    let prod = (&one - &qz).mul_ref(&q_product(&q, &qz, ratio, ctx)?).mul_ref(&q_product(&q, &qz.recip(), ratio, ctx)?);
    // -2 (B2/2) log|q| = 2 pi B2 y
    let b2 = ctx.rational(&siegel_b2(w.a1()));
    let lead = Float::with_val(p, ctx.pi() * 2u32) * b2 * y;
    let v = lead - prod.ln_abs() * 2u32;
    Ok(GreenValue::new(v, Method::Siegel, ctx))
}

/// Parameters of the incomplete-gamma acceleration.
#[derive(Clone, Debug, PartialEq)]
pub struct KroneckerOptions {
    /// Split point `t0 > 0` of the Mellin integral.
    pub split: Rational,
    /// Multiplier on the exponent cutoff; 2 doubles the number of shells kept.
    pub cutoff_scale: f64,
}

impl Default for KroneckerOptions {
    fn default() -> Self {
        KroneckerOptions { split: Rational::from(1), cutoff_scale: 1.0 }
    }
}

/// `E_a(tau)` at `s = 1`: `sum' e^{2 pi i (m a1 + n a2)} Im(tau) / |m tau + n|^2`.
pub fn eisenstein_kronecker(a1: &Rational, a2: &Rational, tau: &Tau, ctx: &PrecisionContext) -> Result<BigReal> {
    eisenstein_kronecker_with(a1, a2, tau, &KroneckerOptions::default(), ctx)
}

/// [`eisenstein_kronecker`] with explicit acceleration parameters.
///
/// Splitting the Mellin integral at `t0` and applying Poisson summation to the
/// lower half gives, with `Q(m,n) = |m tau + n|^2 / y` and its dual form `Q*`,
///
/// `E_a / pi = sum' cos(2 pi <(m,n),a>) e^{-pi t0 Q} / (pi Q) + sum E1(pi Q*(u - a) / t0) - t0`.
///
/// Both sums are cut where the exponent exceeds `(p + 32) ln 2`.
pub fn eisenstein_kronecker_with(a1: &Rational, a2: &Rational, tau: &Tau, opts: &KroneckerOptions, ctx: &PrecisionContext) -> Result<BigReal> {
    if a1.denom() == &1 && a2.denom() == &1 {
        return Err(Error::DivergentInput(format!("({a1}, {a2})")));
    }
    if opts.split <= 0 || opts.cutoff_scale.is_nan() || opts.cutoff_scale <= 0.0 {
        return Err(Error::InvalidInput("split and cutoff scale must be positive".into()));
    }
    let p = ctx.working();
    let pi = ctx.pi();
    let two_pi = Float::with_val(p, &pi * 2u32);
    let x = tau.re();
    let s = tau.im_sq();
    let y = tau.im(ctx);
    let yf = tau.im_f64();
    let xf = tau.re_f64();
    let t0 = ctx.rational(&opts.split);
    let t0f = opts.split.to_f64();
    let cut = opts.cutoff_scale * (p as f64 + 32.0) * std::f64::consts::LN_2;

    // direct sum over (m, n) != 0 with pi t0 Q <= cut
    let r_dir = cut / (std::f64::consts::PI * t0f);
    let mut direct = Float::new(p);
    let m_max = (r_dir / yf).sqrt().floor() as i64 + 1;
    for m in -m_max..=m_max {
        let mf = m as f64;
        let rad = (yf * r_dir - mf * mf * yf * yf).max(0.0).sqrt();
        let c = -mf * xf;
        let lo = (c - rad).floor() as i64 - 1;
        let hi = (c + rad).ceil() as i64 + 1;
        for n in lo..=hi {
            if m == 0 && n == 0 {
                continue;
            }
            let lin = Rational::from(x * m) + n;
            let num = Rational::from(lin.square_ref()) + Rational::from(s * (m * m));
            let q = ctx.rational(&num) / &y;
            let arg = Float::with_val(p, &pi * &t0) * &q;
            if arg.to_f64() > cut {
                continue;
            }
            let theta = frac(&(Rational::from(a1 * m) + Rational::from(a2 * n)));
            let ch = (ctx.rational(&theta) * &two_pi).cos();
            let term = ch * (-arg).exp() / (q * &pi);
            direct += term;
        }
    }

    // dual sum over (u, v) = (m - a1, n - a2) with pi Q*/t0 <= cut
    let r_dual = cut * t0f / std::f64::consts::PI;
    let mut dual = Float::new(p);
    let a1f = a1.to_f64();
    let a2f = a2.to_f64();
    let v_rad = (r_dual / yf).sqrt() + 1.0;
    let n_lo = (a2f - v_rad).floor() as i64 - 1;
    let n_hi = (a2f + v_rad).ceil() as i64 + 1;
    for n in n_lo..=n_hi {
        let v = Rational::from(n) - a2;
        let vf = v.to_f64();
        let rad = (yf * r_dual - yf * yf * vf * vf).max(0.0).sqrt();
        let c = a1f + xf * vf;
        let lo = (c - rad).floor() as i64 - 1;
        let hi = (c + rad).ceil() as i64 + 1;
        for m in lo..=hi {
            let u = Rational::from(m) - a1;
            let lin = u - Rational::from(x * &v);
            let num = Rational::from(lin.square_ref()) + (s * Rational::from(v.square_ref()));
            let arg = ctx.rational(&num) / &y * &pi / &t0;
            if arg.to_f64() > cut {
                continue;
            }
            // E1(X) = -Ei(-X)
            dual -= (-arg).eint();
        }
    }

    let total = direct + dual - t0;
    Ok(total * pi)
}

fn frac(q: &Rational) -> Rational {
    let f = Rational::from(q.floor_ref());
    q - f
}

/// `phi` through the second Kronecker limit formula: `phi(a1, a2) = E_{(a2, -a1)}(tau) / pi`.
/// The index map and the factor `1/pi` were fixed by calibration against the sigma path.
pub fn phi_kronecker(z: &LatticeCoord, tau: &Tau, ctx: &PrecisionContext) -> Result<GreenValue> {
    if z.is_zero() {
        return Err(Error::ZeroPoint);
    }
    let (t, w, _) = reduce_pair(tau, z);
    let neg_a1 = Rational::from(-w.a1());
    let e = eisenstein_kronecker(w.a2(), &neg_a1, &t, ctx)?;
    let v = e / ctx.pi();
    Ok(GreenValue::new(v, Method::Kronecker, ctx))
}

/// Distribution relation `sum_{n w = z} phi(w) = phi(z)` for the sigma path.
pub fn check_distribution(z: &LatticeCoord, n: u64, tau: &Tau, ctx: &PrecisionContext) -> Result<CheckReport> {
    check_distribution_with(z, n, tau, ctx, "distribution", |w| Ok(phi_sigma(w, tau, ctx)?.value))
}

/// Distribution relation for an arbitrary evaluator `f` of `phi` on the fixed `tau`.
pub fn check_distribution_with<F>(z: &LatticeCoord, n: u64, tau: &Tau, ctx: &PrecisionContext, name: &str, f: F) -> Result<CheckReport>
where
    F: Fn(&LatticeCoord) -> Result<BigReal>,
{
    if z.is_zero() {
        return Err(Error::ZeroPoint);
    }
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let p = ctx.working();
    let rhs = f(z)?;
    let mut lhs = Float::new(p);
    let nq = n as i64;
    for t1 in 0..nq {
        for t2 in 0..nq {
            let w = LatticeCoord::new(Rational::from(z.a1() + t1) / Rational::from(nq), Rational::from(z.a2() + t2) / Rational::from(nq));
            lhs += f(&w)?;
        }
    }
    let residual = Float::with_val(p, &lhs - &rhs).abs();
    let digits = crate::numerics::digits_for(ctx);
    Ok(CheckReport::new(name, ctx.bits(), residual, ctx.half_tolerance())
        .with_input("z", z)
        .with_input("n", n)
        .with_input("tau", tau)
        .with_output("sum", crate::numerics::decimal(&lhs, digits))
        .with_output("phi", crate::numerics::decimal(&rhs, digits)))
}

/// `S(n) = sum_{0 != t in E[n]} phi(t)` at working precision, in a fixed order.
pub fn torsion_sum(n: u64, tau: &Tau, primitive_only: bool, ctx: &PrecisionContext) -> Result<BigReal> {
    let mut s = Float::new(ctx.working());
    for t in torsion_points(n, primitive_only) {
        s += phi_sigma(&t.coord(), tau, ctx)?.value;
    }
    Ok(s)
}

/// Checks `S(n) = -2 log n`, the limit `z -> 0` of the distribution relation.
pub fn torsion_log_sum(n: u64, tau: &Tau, ctx: &PrecisionContext) -> Result<CheckReport> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("torsion sum needs n >= 2, got {n}")));
    }
    let p = ctx.working();
    let s = torsion_sum(n, tau, false, ctx)?;
    let target = Float::with_val(p, ctx.real(n).ln() * -2i32);
    let residual = Float::with_val(p, &s - &target).abs();
    let digits = crate::numerics::digits_for(ctx);
    Ok(CheckReport::new("torsion_sum", ctx.bits(), residual, ctx.half_tolerance())
        .with_input("n", n)
        .with_input("tau", tau)
        .with_output("sum", crate::numerics::decimal(&s, digits))
        .with_output("minus_two_log_n", crate::numerics::decimal(&target, digits)))
}

/// Compares the sigma path on `(tau, z)` with the path on `(M tau, z')`, both
/// evaluated on their own basis without reduction.
pub fn check_sl2_invariance(z: &LatticeCoord, tau: &Tau, m: &UnimodularMatrix, ctx: &PrecisionContext) -> Result<CheckReport> {
    if z.is_zero() {
        return Err(Error::ZeroPoint);
    }
    let p = ctx.working();
    let tau2 = tau.apply(m);
    let z2 = transform_coord(z, m);
    let v1 = phi_sigma_in_basis(&z.lift(), tau, ctx)?;
    let v2 = phi_sigma_in_basis(&z2.lift(), &tau2, ctx)?;
    let residual = Float::with_val(p, &v1 - &v2).abs();
    let digits = crate::numerics::digits_for(ctx);
    Ok(CheckReport::new("sl2_invariance", ctx.bits(), residual, ctx.half_tolerance())
        .with_input("z", z)
        .with_input("tau", tau)
        .with_input("matrix", m)
        .with_output("tau_image", &tau2)
        .with_output("z_image", &z2)
        .with_output("phi", crate::numerics::decimal(&v1, digits))
        .with_output("phi_image", crate::numerics::decimal(&v2, digits)))
}

/// `|phi(z) - phi(-z)|` on the sigma path.
pub fn check_evenness(z: &LatticeCoord, tau: &Tau, ctx: &PrecisionContext) -> Result<CheckReport> {
    let a = phi_sigma(z, tau, ctx)?.value;
    let b = phi_sigma(&z.neg(), tau, ctx)?.value;
    let residual = Float::with_val(ctx.working(), &a - &b).abs();
    Ok(CheckReport::new("evenness", ctx.bits(), residual, ctx.half_tolerance()).with_input("z", z).with_input("tau", tau))
}

/// `|phi(z) - phi(z + m tau + n)|`, both evaluated on the unreduced lifts.
pub fn check_periodicity(z: &LatticeCoord, tau: &Tau, shift: (i64, i64), ctx: &PrecisionContext) -> Result<CheckReport> {
    let base = z.lift();
    let moved = PlanePoint::new(Rational::from(&base.a1 + shift.0), Rational::from(&base.a2 + shift.1));
    let a = phi_sigma_in_basis(&base, tau, ctx)?;
    let b = phi_sigma_in_basis(&moved, tau, ctx)?;
    let residual = Float::with_val(ctx.working(), &a - &b).abs();
    Ok(CheckReport::new("periodicity", ctx.bits(), residual, ctx.half_tolerance())
        .with_input("z", z)
        .with_input("tau", tau)
        .with_input("shift", format!("{},{}", shift.0, shift.1)))
}

/// Spread of `phi(z) + 2 log|z|` over `z = 10^-4, 10^-6, 10^-8`; continuity across the pole
/// means the spread is small (tolerance `1e-3`).
pub fn check_pole(tau: &Tau, ctx: &PrecisionContext) -> Result<CheckReport> {
    let p = ctx.working();
    let mut vals = Vec::new();
    for k in [4u32, 6, 8] {
        let den = 10u64.pow(k);
        let z = LatticeCoord::from_ratios(0, 1, 1, den);
        let zc = Float::with_val(p, 1) / Float::with_val(p, den);
        vals.push(phi_sigma(&z, tau, ctx)?.value + zc.ln() * 2u32);
    }
    let hi = vals.iter().fold(vals[0].clone(), |m, v| m.max(v));
    let lo = vals.iter().fold(vals[0].clone(), |m, v| m.min(v));
    let spread = hi - lo;
    let mut r = CheckReport::new("pole", ctx.bits(), spread, Float::with_val(p, 1e-3)).with_input("tau", tau);
    for (k, v) in [4, 6, 8].iter().zip(&vals) {
        r = r.with_output(format!("z=1e-{k}"), crate::numerics::decimal(v, 20));
    }
    Ok(r)
}

/// Midpoint rule on the unit square with nodes `((i + 1/2)/n, (j + 1/2)/n)`.
pub fn midpoint_rule<F>(n: u64, ctx: &PrecisionContext, mut f: F) -> Result<BigReal>
where
    F: FnMut(&LatticeCoord) -> Result<BigReal>,
{
    if n == 0 {
        return Err(Error::InvalidInput("grid size must be positive".into()));
    }
    let p = ctx.working();
    let mut s = Float::new(p);
    let den = 2 * n;
    for i in 0..n {
        for j in 0..n {
            let w = LatticeCoord::from_ratios((2 * i + 1) as i64, den, (2 * j + 1) as i64, den);
            s += f(&w)?;
        }
    }
    Ok(s / Float::with_val(p, n * n))
}

/// Midpoint rule for `phi` evaluated point by point (sigma path). `O(n^2)` evaluations.
pub fn midpoint_integral_direct(tau: &Tau, n: u64, ctx: &PrecisionContext) -> Result<BigReal> {
    let (t, _) = reduce_tau(tau);
    midpoint_rule(n, ctx, |w| Ok(phi_siegel(w, &t, ctx)?.value))
}

/// The same midpoint sum, with each row `a1 = (i + 1/2)/n` summed in closed form.
///
/// With `zeta_j = e^{2 pi i (j + 1/2)/n}`, `prod_j (1 - v zeta_j) = 1 + v^n`, so the
/// `n` Siegel products of one row collapse to `1 + w^n` and `1 + (q^k w^{+-1})^n`
/// where `w = e^{2 pi i a1 tau}`. Exact for every `n`; `O(n)` products in total.
pub fn midpoint_integral(tau: &Tau, n: u64, ctx: &PrecisionContext) -> Result<BigReal> {
    if n == 0 {
        return Err(Error::InvalidInput("grid size must be positive".into()));
    }
    let (t, _) = reduce_tau(tau);
    let p = ctx.working();
    let y = t.im(ctx);
    let one = BigComplex::one(p);
    let qn = PlanePoint::new(Rational::from(n), Rational::new()).complex(&t, ctx).exp_2pi_i();
    let ratio = ((-2.0 * std::f64::consts::PI * t.im_f64() * n as f64).exp() * (1.0 + 1e-12)).max(1e-300);
    let two_pi_y = Float::with_val(p, ctx.pi() * 2u32) * &y;
    let mut total = Float::new(p);
    for i in 0..n {
        let a1 = Rational::from(((2 * i + 1) as i64, 2 * n));
        // w^n = e^{2 pi i (i + 1/2) tau}
        let wn = PlanePoint::new(Rational::from((2 * i + 1) as i64) / 2u32, Rational::new()).complex(&t, ctx).exp_2pi_i();
        let neg_wn = -wn.clone();
        let neg_wn_inv = -wn.recip();
        let prod = (&one + &wn).mul_ref(&q_product(&qn, &neg_wn, ratio, ctx)?).mul_ref(&q_product(&qn, &neg_wn_inv, ratio, ctx)?);
        let b2 = ctx.rational(&siegel_b2(&a1));
        let row = Float::with_val(p, &two_pi_y * &b2) * n - prod.ln_abs() * 2u32;
        total += row;
    }
    Ok(total / Float::with_val(p, n * n))
}

/// Zero-mean check: `I_n` and `I_2n`, passed iff `|I_2n| <= max(10 |I_2n - I_n|, 1e-3)`.
pub fn integral_over_torus(tau: &Tau, n: u64, ctx: &PrecisionContext) -> Result<CheckReport> {
    Ok(torus_integrals(tau, n, ctx)?.2)
}

/// `(I_n, I_2n, report)` as in [`integral_over_torus`].
pub fn torus_integrals(tau: &Tau, n: u64, ctx: &PrecisionContext) -> Result<(BigReal, BigReal, CheckReport)> {
    if n < 64 {
        return Err(Error::InvalidInput(format!("grid size must be at least 64, got {n}")));
    }
    let p = ctx.working();
    let i_n = midpoint_integral(tau, n, ctx)?;
    let i_2n = midpoint_integral(tau, 2 * n, ctx)?;
    let step = Float::with_val(p, &i_2n - &i_n).abs();
    let tol = Float::with_val(p, &step * 10u32).max(&Float::with_val(p, 1e-3));
    let residual = Float::with_val(p, i_2n.abs_ref());
    let report = CheckReport::new("integral", ctx.bits(), residual, tol)
        .with_input("tau", tau)
        .with_input("n", n)
        .with_output("i_n", crate::numerics::decimal(&i_n, 12))
        .with_output("i_2n", crate::numerics::decimal(&i_2n, 12));
    Ok((i_n, i_2n, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::delta;
    use crate::numerics::agree_bits;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn c(p1: i64, q1: u64, p2: i64, q2: u64) -> LatticeCoord {
        LatticeCoord::from_ratios(p1, q1, p2, q2)
    }

    fn tau_03() -> Tau {
        Tau::new(Rational::from((3, 10)), Rational::from((6, 5))).unwrap()
    }

    #[test]
    fn zero_point_rejected() {
        let z = LatticeCoord::zero();
        for m in Method::ALL {
            assert_eq!(phi(m, &z, &Tau::i(), &ctx()), Err(Error::ZeroPoint));
        }
    }

    #[test]
    fn even_and_periodic() {
        let k = ctx();
        let z = c(1, 3, 1, 5);
        let t = Tau::two_i();
        let a = phi_sigma(&z, &t, &k).unwrap().value;
        let b = phi_sigma(&z.neg(), &t, &k).unwrap().value;
        assert!(agree_bits(&a, &b, &k) >= k.bits());
        // lattice translate, evaluated on the unreduced lift
        let shifted = PlanePoint::new(Rational::from((4, 3)), Rational::from((-4, 5)));
        let s = phi_sigma_in_basis(&shifted, &t, &k).unwrap();
        assert!(agree_bits(&a, &s, &k) >= k.bits() - k.guard());
    }

    #[test]
    fn pole_expansion() {
        // phi ~ -2 log|z| - log|Delta|/6 for tiny z
        let k = ctx();
        let t = Tau::i();
        let z = c(0, 1, 1, 100_000_000);
        let v = phi_sigma(&z, &t, &k).unwrap().value;
        let d = delta(&t, &k).unwrap().ln_abs();
        let expect = Float::with_val(k.working(), 1e-8).ln() * -2i32 - d / 6u32;
        let diff = Float::with_val(k.working(), &v - &expect).abs();
        assert!(diff < 1e-10, "{diff}");
    }

    #[test]
    fn siegel_matches_sigma() {
        let k = ctx();
        for (z, t) in [(c(1, 3, 1, 5), Tau::two_i()), (c(2, 7, 5, 9), tau_03()), (c(1, 2, 0, 1), Tau::i()), (c(0, 1, 1, 3), Tau::rho())] {
            let a = phi_sigma(&z, &t, &k).unwrap().value;
            let b = phi_siegel(&z, &t, &k).unwrap().value;
            assert!(agree_bits(&a, &b, &k) >= k.bits() - 2 * k.guard(), "{z} {t}");
        }
    }

    #[test]
    fn siegel_even_in_coordinates() {
        let k = ctx();
        let a = phi_siegel(&c(2, 7, 3, 11), &tau_03(), &k).unwrap().value;
        let b = phi_siegel(&c(5, 7, 8, 11), &tau_03(), &k).unwrap().value;
        assert!(agree_bits(&a, &b, &k) >= k.bits() - k.guard());
    }

    #[test]
    fn b2_values() {
        assert_eq!(siegel_b2(&Rational::new()), Rational::from((1, 6)));
        assert_eq!(siegel_b2(&Rational::from((1, 2))), Rational::from((-1, 12)));
    }

    #[test]
    fn kronecker_matches_direct_double_sum() {
        // tau = i, a = (1/2, 1/2): sum' (-1)^(m+n) / (m^2 + n^2), square truncation
        let k = PrecisionContext::new(96, 32).unwrap();
        let h = Rational::from((1, 2));
        let e = eisenstein_kronecker(&h, &h, &Tau::i(), &k).unwrap().to_f64();
        let big_n = 2000i64;
        let mut s = 0.0f64;
        for m in -big_n..=big_n {
            let mut row = 0.0f64;
            for n in -big_n..=big_n {
                if m == 0 && n == 0 {
                    continue;
                }
                let sign = if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
                row += sign / ((m * m + n * n) as f64);
            }
            s += row;
        }
        assert!((e - s).abs() < 1e-4, "accelerated {e}, direct {s}");
    }

    #[test]
    fn kronecker_symmetric_and_cutoff_stable() {
        let k = ctx();
        let t = tau_03();
        let (a1, a2) = (Rational::from((1, 3)), Rational::from((2, 5)));
        let e = eisenstein_kronecker(&a1, &a2, &t, &k).unwrap();
        let em = eisenstein_kronecker(&Rational::from(-&a1), &Rational::from(-&a2), &t, &k).unwrap();
        assert!(agree_bits(&e, &em, &k) >= k.bits());
        let opts = KroneckerOptions { split: Rational::from((3, 4)), cutoff_scale: 2.0 };
        let e2 = eisenstein_kronecker_with(&a1, &a2, &t, &opts, &k).unwrap();
        assert!(agree_bits(&e, &e2, &k) >= k.bits());
    }

    #[test]
    fn kronecker_rejects_integral_index() {
        let r = eisenstein_kronecker(&Rational::from(1), &Rational::from(-2), &Tau::i(), &ctx());
        assert!(matches!(r, Err(Error::DivergentInput(_))));
    }

    #[test]
    fn kronecker_matches_sigma() {
        let k = ctx();
        for (z, t) in [(c(1, 4, 0, 1), Tau::two_i()), (c(1, 2, 1, 2), Tau::i()), (c(2, 7, 5, 9), tau_03())] {
            let a = phi_sigma(&z, &t, &k).unwrap().value;
            let b = phi_kronecker(&z, &t, &k).unwrap().value;
            let d = Float::with_val(k.working(), &a - &b).abs();
            assert!(d < 1e-10, "{z} {t} {d}");
            let bm = phi_kronecker(&z.neg(), &t, &k).unwrap().value;
            assert!(agree_bits(&b, &bm, &k) >= k.bits());
        }
    }

    #[test]
    fn dual_precision_within_estimate() {
        let lo = ctx();
        let hi = lo.refined(64);
        let z = c(1, 3, 1, 5);
        for m in Method::ALL {
            let a = phi(m, &z, &Tau::two_i(), &lo).unwrap();
            let b = phi(m, &z, &Tau::two_i(), &hi).unwrap();
            let d = Float::with_val(hi.working(), &a.value - &b.value).abs();
            assert!(d <= a.est_error, "{m}: {d}");
        }
    }

    #[test]
    fn distribution_examples() {
        let k = ctx();
        assert!(check_distribution(&c(1, 3, 0, 1), 2, &Tau::two_i(), &k).unwrap().passed());
        assert!(check_distribution(&c(1, 2, 1, 2), 5, &Tau::i(), &k).unwrap().passed());
        let r = check_distribution(&c(1, 3, 0, 1), 1, &Tau::two_i(), &k).unwrap();
        assert!(r.residual().is_zero());
    }

    #[test]
    fn fault_injection_breaks_distribution() {
        let k = ctx();
        let e = k.real(1).exp();
        let t = Tau::two_i();
        let r = check_distribution_with(&c(1, 3, 0, 1), 2, &t, &k, "fault", |w| Ok(phi_sigma_with_delta_factor(w, &t, &e, &k)?.value)).unwrap();
        assert!(!r.passed());
        // (n^2 - 1) log(e) / 6
        let d = Float::with_val(64, r.residual() - 0.5f64).abs();
        assert!(d < 1e-30);
    }

    #[test]
    fn torsion_sum_examples() {
        let k = ctx();
        assert!(torsion_log_sum(2, &Tau::two_i(), &k).unwrap().passed());
        assert!(torsion_log_sum(3, &Tau::i(), &k).unwrap().passed());
        let s4 = torsion_sum(4, &Tau::i(), false, &k).unwrap();
        let parts = torsion_sum(2, &Tau::i(), false, &k).unwrap() + torsion_sum(4, &Tau::i(), true, &k).unwrap();
        assert!(agree_bits(&s4, &parts, &k) >= k.bits());
    }

    #[test]
    fn sl2_examples() {
        let k = ctx();
        let z = c(1, 3, 1, 5);
        let r = check_sl2_invariance(&z, &Tau::two_i(), &UnimodularMatrix::identity(), &k).unwrap();
        assert!(r.residual().is_zero());
        assert!(check_sl2_invariance(&z, &Tau::two_i(), &UnimodularMatrix::t(1), &k).unwrap().passed());
        assert!(check_sl2_invariance(&z, &Tau::two_i(), &UnimodularMatrix::s(), &k).unwrap().passed());
        let m = UnimodularMatrix::new(2, 1, 1, 1).unwrap();
        assert!(check_sl2_invariance(&c(2, 7, 1, 4), &tau_03(), &m, &k).unwrap().passed());
    }

    #[test]
    fn quadrature_of_constant_is_one() {
        let k = ctx();
        let v = midpoint_rule(7, &k, |_| Ok(k.real(1))).unwrap();
        assert_eq!(v, 1);
    }

    #[test]
    fn row_summed_quadrature_matches_pointwise() {
        let k = PrecisionContext::new(128, 32).unwrap();
        for t in [Tau::i(), tau_03()] {
            let a = midpoint_integral(&t, 32, &k).unwrap();
            let b = midpoint_integral_direct(&t, 32, &k).unwrap();
            let d = Float::with_val(k.working(), &a - &b).abs();
            assert!(d < 1e-30, "{t}: {d}");
        }
    }

    #[test]
    fn integral_vanishes() {
        let k = PrecisionContext::new(128, 32).unwrap();
        let r = integral_over_torus(&Tau::two_i(), 64, &k).unwrap();
        assert!(r.passed(), "{}", r.to_line());
    }
}
