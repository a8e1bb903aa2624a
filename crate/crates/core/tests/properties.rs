use ellgreen::bernoulli::{bernoulli, denominator_prime_product, n2g};
use ellgreen::green::{phi_siegel, phi_sigma, phi_sigma_in_basis};
use ellgreen::lattice::{quasi_period, reduce_tau, torsion_points, transform_coord, LatticeCoord, PlanePoint, Tau, UnimodularMatrix};
use ellgreen::numerics::PrecisionContext;
use ellgreen::orderbound::{ratio_order_refined, residue_ratio_set};
use ellgreen::reckon::{is_lll_reduced, lll_reduce};
use ellgreen::report::CheckReport;
use ellgreen::Error;
use proptest::prelude::*;
use rug::{Float, Integer, Rational};

const BITS: u32 = 128;

fn ctx() -> PrecisionContext {
    PrecisionContext::new(BITS, 32).unwrap()
}

fn tol(bits: u32) -> Float {
    Float::with_val(BITS + 64, Float::i_exp(1, -(bits as i32)))
}

fn close(a: &Float, b: &Float, bits: u32) -> bool {
    Float::with_val(a.prec(), a - b).abs() <= tol(bits)
}

/// Upper half-plane points with small rational coordinates.
fn tau_strategy() -> impl Strategy<Value = Tau> {
    (-8i64..=8, 1u64..=8, 1i64..=20, 1u64..=8)
        .prop_map(|(a, b, c, d)| Tau::new(Rational::from((a, b)), Rational::from((c, d)).max(Rational::from((1, 2)))).unwrap())
}

/// Nonzero points of `C / Lambda` with denominators at most 12.
fn point_strategy() -> impl Strategy<Value = LatticeCoord> {
    (0i64..12, 2u64..=12, 0i64..12, 2u64..=12).prop_map(|(p1, q1, p2, q2)| LatticeCoord::from_ratios(p1, q1, p2, q2)).prop_filter("nonzero", |z| !z.is_zero())
}

/// Products of `T^k` and `S`.
fn matrix_strategy() -> impl Strategy<Value = UnimodularMatrix> {
    prop::collection::vec(-3i64..=3, 1..5)
        .prop_map(|ks| ks.iter().fold(UnimodularMatrix::identity(), |m, &k| m.compose(&UnimodularMatrix::t(k)).compose(&UnimodularMatrix::s())))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn phi_is_even(z in point_strategy(), tau in tau_strategy()) {
        let c = ctx();
        let a = phi_sigma(&z, &tau, &c).unwrap().value;
        let b = phi_sigma(&z.neg(), &tau, &c).unwrap().value;
        prop_assert!(close(&a, &b, BITS / 2));
    }

    #[test]
    fn phi_is_lattice_periodic(z in point_strategy(), tau in tau_strategy(), m in -3i64..=3, n in -3i64..=3) {
        let c = ctx();
        let base = z.lift();
        let moved = PlanePoint::new(Rational::from(&base.a1 + m), Rational::from(&base.a2 + n));
        let a = phi_sigma_in_basis(&base, &tau, &c).unwrap();
        let b = phi_sigma_in_basis(&moved, &tau, &c).unwrap();
        prop_assert!(close(&a, &b, BITS / 2));
    }

    #[test]
    fn phi_is_sl2_invariant(z in point_strategy(), tau in tau_strategy(), m in matrix_strategy()) {
        let c = ctx();
        let a = phi_sigma(&z, &tau, &c).unwrap().value;
        let b = phi_sigma(&transform_coord(&z, &m), &tau.apply(&m), &c).unwrap().value;
        prop_assert!(close(&a, &b, BITS / 2));
    }

    #[test]
    fn sigma_and_siegel_paths_agree(z in point_strategy(), tau in tau_strategy()) {
        let c = ctx();
        let a = phi_sigma(&z, &tau, &c).unwrap().value;
        let b = phi_siegel(&z, &tau, &c).unwrap().value;
        prop_assert!(close(&a, &b, BITS - 64));
    }

    #[test]
    fn evaluation_is_bit_identical(z in point_strategy(), tau in tau_strategy()) {
        let c = ctx();
        let a = phi_sigma(&z, &tau, &c).unwrap().value;
        let b = phi_sigma(&z, &tau, &c).unwrap().value;
        prop_assert_eq!(a.to_string_radix(16, None), b.to_string_radix(16, None));
    }

    #[test]
    fn raising_precision_refines(z in point_strategy(), tau in tau_strategy()) {
        let lo = ctx();
        let hi = PrecisionContext::new(2 * BITS, 32).unwrap();
        let a = phi_siegel(&z, &tau, &lo).unwrap().value;
        let b = phi_siegel(&z, &tau, &hi).unwrap().value;
        prop_assert!(close(&a, &b, BITS - 32));
    }

    #[test]
    fn distribution_survives_exponentiation(z in point_strategy(), n in 2u64..=3) {
        // exp(24 n sum phi(w)) = exp(24 n phi(z)), compared relatively
        let c = ctx();
        let tau = Tau::i();
        let mut s = Float::new(c.working());
        for t1 in 0..n {
            for t2 in 0..n {
                let w = LatticeCoord::new(Rational::from(z.a1() + t1) / n, Rational::from(z.a2() + t2) / n);
                s += phi_sigma(&w, &tau, &c).unwrap().value;
            }
        }
        let f = (24 * n) as u32;
        let lhs = Float::with_val(c.working(), &s * f).exp();
        let rhs = Float::with_val(c.working(), phi_sigma(&z, &tau, &c).unwrap().value * f).exp();
        let rel = Float::with_val(c.working(), &lhs - &rhs).abs() / &rhs;
        prop_assert!(rel <= tol(BITS / 2 - 16));
    }

    #[test]
    fn quasi_period_map_is_additive(z in point_strategy(), w in point_strategy(), tau in tau_strategy()) {
        let c = ctx();
        let (zl, wl) = (z.lift(), w.lift());
        let sum = &zl + &wl;
        let lhs = quasi_period(&sum, &tau, &c).unwrap();
        let rhs = &quasi_period(&zl, &tau, &c).unwrap() + &quasi_period(&wl, &tau, &c).unwrap();
        let d = (&lhs - &rhs).abs();
        let scale = Float::with_val(64, 1) + Float::with_val(64, lhs.abs());
        prop_assert!(Float::with_val(64, &d / &scale) <= tol(BITS - 8));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn reduced_tau_is_in_fundamental_domain(tau in tau_strategy()) {
        let (r, m) = reduce_tau(&tau);
        prop_assert!(r.is_reduced());
        prop_assert_eq!(tau.apply(&m), r);
        prop_assert_eq!(m.det(), 1);
    }

    #[test]
    fn torsion_point_count(n in 1u64..=12) {
        prop_assert_eq!(torsion_points(n, false).len() as u64, n * n - 1);
    }

    #[test]
    fn refined_bound_divides_coarse(n in 1u64..=200, c in 1u64..=60) {
        prop_assert!(ratio_order_refined(n, c).unwrap().refined_divides_coarse());
    }

    #[test]
    fn odd_bernoulli_numbers_vanish(k in 1usize..=60) {
        prop_assert_eq!(bernoulli(2 * k + 1), Rational::new());
    }

    #[test]
    fn bernoulli_denominators_are_squarefree(k in 1usize..=50) {
        let d = bernoulli(2 * k).denom().clone();
        let sq_free = (2u32..=(2 * k as u32 + 1)).all(|p| !d.is_divisible(&Integer::from(p * p)));
        prop_assert!(sq_free);
    }

    #[test]
    fn n2g_matches_prime_product(g in 1u64..=50) {
        prop_assert_eq!(n2g(g).unwrap(), denominator_prime_product(2 * g).unwrap());
    }

    #[test]
    fn report_passes_iff_within_tolerance(r in 0f64..1e3, t in 0f64..1e3) {
        let rep = CheckReport::new("p", 64, Float::with_val(64, r), Float::with_val(64, t));
        prop_assert_eq!(rep.passed(), r <= t);
        let v = rep.to_json("check");
        for key in ["command", "inputs", "outputs", "residual", "tolerance", "passed", "bits", "version"] {
            prop_assert!(v.get(key).is_some(), "missing {}", key);
        }
        prop_assert!(v["residual"].is_string());
    }

    #[test]
    fn lll_output_is_reduced(rows in prop::collection::vec(prop::collection::vec(-60i64..=60, 5), 2..=5)) {
        let basis: Vec<Vec<Integer>> = rows.iter().map(|r| r.iter().map(|&x| Integer::from(x)).collect()).collect();
        match lll_reduce(&basis) {
            Ok(out) => {
                prop_assert!(is_lll_reduced(&out));
                prop_assert_eq!(out.len(), basis.len());
            }
            Err(Error::DependentRows) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn ratio_set_is_a_subgroup(p in prop::sample::select(vec![2u64, 3, 5, 7]), delta in 1u32..=3, n in 1u64..=12) {
        prop_assume!(p.pow(delta) <= 400);
        let set = residue_ratio_set(p, delta, n).unwrap();
        let m = p.pow(delta);
        prop_assert!(set.contains(&1));
        for &x in &set {
            for &y in &set {
                prop_assert!(set.binary_search(&(x * y % m)).is_ok());
            }
        }
    }
}
