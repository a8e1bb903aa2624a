//! Dedekind eta, the discriminant, Weierstrass sigma and the Klein form on
//! the lattice `Z + Z tau`, all by q-products with geometric tail bounds.

use rug::{Float, Rational};

use crate::error::{Error, Result};
use crate::lattice::{quasi_period_from, quasi_periods, reduce_tau, LatticeCoord, PlanePoint, Tau, UnimodularMatrix};
use crate::numerics::{product_tail_bounded, BigComplex, DecayCertificate, PrecisionContext};

/// Upper bound for `|q|` usable as a decay ratio even when `|q|` underflows f64.
fn nome_ratio(tau: &Tau) -> f64 {
    (tau.nome_abs_f64() * (1.0 + 1e-12)).max(1e-300)
}

/// `prod_{k >= 1} (1 - q^k w)`.
pub(crate) fn q_product(q: &BigComplex, w: &BigComplex, ratio: f64, ctx: &PrecisionContext) -> Result<BigComplex> {
    let mut cur = w.clone();
    let (v, _) = product_tail_bounded(
        |_| {
            cur = cur.mul_ref(q);
            let t = cur.clone();
            -t
        },
        DecayCertificate::new(ratio, 0),
        ctx,
    )?;
    Ok(v)
}

/// `eta(tau) = q^(1/24) prod (1 - q^k)` summed on the given basis, no reduction.
pub fn dedekind_eta_series(tau: &Tau, ctx: &PrecisionContext) -> Result<BigComplex> {
    if tau.im_f64() < 0.1 {
        log::warn!("eta q-product at Im(tau) = {} converges slowly", tau.im_f64());
    }
    let p = ctx.working();
    let q = tau.nome(ctx);
    let prod = q_product(&q, &BigComplex::one(p), nome_ratio(tau), ctx)?;
    let q24 = tau.value(ctx).scale(&(Float::with_val(p, 1) / 24u32)).exp_2pi_i();
    Ok(q24.mul_ref(&prod))
}

/// Dedekind sum `s(h, k) = sum_{r=1}^{k-1} ((r/k)) ((h r/k))`, exact.
pub fn dedekind_sum(h: i64, k: i64) -> Rational {
    assert!(k > 0);
    let saw = |x: Rational| -> Rational {
        if x.denom() == &1 {
            Rational::new()
        } else {
            let fl = Rational::from(x.floor_ref());
            x - fl - Rational::from((1, 2))
        }
    };
    let mut s = Rational::new();
    for r in 1..k {
        s += saw(Rational::from((r, k))) * saw(Rational::from((h * r, k)));
    }
    s
}

/// The factor `F` with `eta(M tau) = F * eta(tau)`.
pub fn eta_transform_factor(m: &UnimodularMatrix, tau: &Tau, ctx: &PrecisionContext) -> BigComplex {
    let p = ctx.working();
    // -I acts trivially; pick the sign with c > 0, or c = 0 and d = 1.
    let m = if m.c < 0 || (m.c == 0 && m.d < 0) { UnimodularMatrix { a: -m.a, b: -m.b, c: -m.c, d: -m.d } } else { *m };
    let pi = ctx.pi();
    if m.c == 0 {
        let phase = Float::with_val(p, &pi * m.b) / 12u32;
        return BigComplex::from_imag(phase).exp();
    }
    let e = Rational::from((m.a + m.d, 12 * m.c)) - dedekind_sum(m.d, m.c);
    let phase = BigComplex::from_imag(pi * ctx.rational(&e)).exp();
    // (-i (c tau + d))^(1/2), principal branch; the argument has positive real part
    let j = tau.automorphy_factor(&m, ctx);
    let root = j.mul_i().scale(&Float::with_val(p, -1)).sqrt();
    phase.mul_ref(&root)
}

/// Dedekind eta at any `tau`: the product on the reduced point, carried back
/// through the eta multiplier.
pub fn dedekind_eta(tau: &Tau, ctx: &PrecisionContext) -> Result<BigComplex> {
    let (red, m) = reduce_tau(tau);
    let eta_red = dedekind_eta_series(&red, ctx)?;
    if m == UnimodularMatrix::identity() {
        return Ok(eta_red);
    }
    Ok(eta_red.div(&eta_transform_factor(&m, tau, ctx)))
}

/// `Delta(tau) = (2 pi)^12 eta(tau)^24`.
pub fn delta(tau: &Tau, ctx: &PrecisionContext) -> Result<BigComplex> {
    let eta = dedekind_eta(tau, ctx)?;
    let p = ctx.working();
    let two_pi_12 = Float::with_val(p, ctx.pi() * 2u32).pow_(12);
    Ok(eta.pow_u(24).scale(&two_pi_12))
}

/// The twelfth root of `Delta` used by the Green function: `2 pi eta(tau)^2`.
pub fn delta_twelfth_root(tau: &Tau, ctx: &PrecisionContext) -> Result<BigComplex> {
    let eta = dedekind_eta(tau, ctx)?;
    Ok(eta.square().scale(&(ctx.pi() * 2u32)))
}

/// Same as [`delta_twelfth_root`] but with the eta product taken on the given
/// basis, without reduction.
pub(crate) fn delta_twelfth_root_in_basis(tau: &Tau, ctx: &PrecisionContext) -> Result<BigComplex> {
    let eta = dedekind_eta_series(tau, ctx)?;
    Ok(eta.square().scale(&(ctx.pi() * 2u32)))
}

trait PowF {
    fn pow_(self, n: u32) -> Self;
}

impl PowF for Float {
    fn pow_(self, n: u32) -> Float {
        use rug::ops::Pow;
        let p = self.prec();
        Float::with_val(p, self.pow(n))
    }
}

fn sigma_with(z: &PlanePoint, tau: &Tau, eta1: &BigComplex, ctx: &PrecisionContext) -> Result<BigComplex> {
    let p = ctx.working();
    if z.is_lattice_point() {
        log::warn!("sigma evaluated at a lattice point; returning 0");
        return Ok(BigComplex::zero(p));
    }
    let pi = ctx.pi();
    let zc = z.complex(tau, ctx);
    let q = tau.nome(ctx);
    let qz = zc.exp_2pi_i();
    let qz_inv = qz.recip();
    let ratio = nome_ratio(tau);
    let p1 = q_product(&q, &qz, ratio, ctx)?;
    let p2 = q_product(&q, &qz_inv, ratio, ctx)?;
    let p3 = q_product(&q, &BigComplex::one(p), ratio, ctx)?;
    // exp(eta_1 z^2 / 2) / (2 pi i) * (q_z^(1/2) - q_z^(-1/2))
    let gauss = eta1.mul_ref(&zc.square()).scale(&Float::with_val(p, 0.5)).exp();
    let half = BigComplex::from_imag(pi.clone()).mul_ref(&zc).exp();
    let diff = &half - &half.recip();
    let two_pi_i = BigComplex::from_imag(Float::with_val(p, &pi * 2u32));
    let pref = gauss.mul_ref(&diff).div(&two_pi_i);
    Ok(pref.mul_ref(&p1).mul_ref(&p2).div(&p3.square()))
}

/// Weierstrass sigma of the lattice `Z + Z tau` (normalized `sigma'(0) = 1`)
/// at the representative `a1 tau + a2` of `z` with `0 <= a1, a2 < 1`.
pub fn weierstrass_sigma(z: &LatticeCoord, tau: &Tau, ctx: &PrecisionContext) -> Result<BigComplex> {
    sigma_at(&z.lift(), tau, ctx)
}

/// Weierstrass sigma at an arbitrary point `a1 tau + a2` of the plane.
pub fn sigma_at(z: &PlanePoint, tau: &Tau, ctx: &PrecisionContext) -> Result<BigComplex> {
    let (eta1, _) = quasi_periods(tau, ctx)?;
    sigma_with(z, tau, &eta1, ctx)
}

/// Klein form `exp(-z eta(z)/2) sigma(z)` at the canonical representative of `z`.
pub fn klein_form(z: &LatticeCoord, tau: &Tau, ctx: &PrecisionContext) -> Result<BigComplex> {
    klein_form_at(&z.lift(), tau, ctx)
}

/// Klein form at an arbitrary point of the plane.
pub fn klein_form_at(z: &PlanePoint, tau: &Tau, ctx: &PrecisionContext) -> Result<BigComplex> {
    if z.is_lattice_point() {
        return Err(Error::ZeroPoint);
    }
    let (eta1, eta2) = quasi_periods(tau, ctx)?;
    let sigma = sigma_with(z, tau, &eta1, ctx)?;
    let eta_z = quasi_period_from(z, &eta1, &eta2, ctx);
    let zc = z.complex(tau, ctx);
    let expo = zc.mul_ref(&eta_z).scale(&Float::with_val(ctx.working(), -0.5)).exp();
    Ok(expo.mul_ref(&sigma))
}
