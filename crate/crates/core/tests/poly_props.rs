use funnelim::poly::{are_coprime, multiply, scaled_resultant};
use funnelim::Polynomial;
use nalgebra::Complex;
use proptest::prelude::*;

/// Monic polynomial from a mix of real roots and complex-conjugate pairs.
fn from_roots(real: &[f64], pairs: &[(f64, f64)]) -> Polynomial<f64> {
    let mut p = Polynomial::from_real_roots(real);
    for &(re, im) in pairs {
        p = &p * &Polynomial::new(vec![re * re + im * im, -2.0 * re, 1.0]);
    }
    p
}

fn root_strategy() -> impl Strategy<Value = Polynomial<f64>> {
    (
        prop::collection::vec(-3.0..3.0f64, 0..4),
        prop::collection::vec((-3.0..3.0f64, 0.1..3.0f64), 0..3),
    )
        .prop_filter("degree at least one", |(r, p)| !r.is_empty() || !p.is_empty())
        .prop_map(|(r, p)| from_roots(&r, &p))
}

fn coeff_strategy() -> impl Strategy<Value = Polynomial<f64>> {
    prop::collection::vec(-5.0..5.0f64, 1..8).prop_map(|mut c| {
        c.push(1.0);
        Polynomial::new(c)
    })
}

fn root_oracle(p: &Polynomial<f64>) -> Option<bool> {
    let roots = p.roots().ok()?;
    let abscissa = roots.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    // near-axis roots are excluded: both tests are ill-conditioned there
    if abscissa.abs() < 1e-6 * (1.0 + p.max_abs_coeff()) {
        return None;
    }
    Some(abscissa < 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn routh_matches_roots_for_planted_roots(p in root_strategy()) {
        if let Some(expected) = root_oracle(&p) {
            prop_assert_eq!(p.is_hurwitz().unwrap(), expected, "{}", p);
        }
    }

    #[test]
    fn routh_matches_roots_for_random_coefficients(p in coeff_strategy()) {
        if let Some(expected) = root_oracle(&p) {
            prop_assert_eq!(p.is_hurwitz().unwrap(), expected, "{}", p);
        }
    }
}

proptest! {
    #[test]
    fn product_is_commutative_and_associative(a in coeff_strategy(), b in coeff_strategy(), c in coeff_strategy()) {
        let ab = multiply(&a, &b);
        let ba = multiply(&b, &a);
        prop_assert_eq!(ab.degree(), ba.degree());
        for (x, y) in ab.coeffs().iter().zip(ba.coeffs()) {
            prop_assert!((x - y).abs() <= 1e-13 * (1.0 + ab.max_abs_coeff()));
        }
        let left = multiply(&ab, &c);
        let right = multiply(&a, &multiply(&b, &c));
        let scale = 1.0 + left.max_abs_coeff();
        prop_assert_eq!(left.degree(), right.degree());
        for (x, y) in left.coeffs().iter().zip(right.coeffs()) {
            prop_assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn sum_and_difference_cancel(a in coeff_strategy(), b in coeff_strategy()) {
        let back = &(&a + &b) - &b;
        for j in 0..=a.degree() {
            prop_assert!((back.coeff(j) - a.coeff(j)).abs() <= 1e-12 * (1.0 + a.max_abs_coeff() + b.max_abs_coeff()));
        }
    }

    #[test]
    fn roots_of_product_are_union_of_roots(
        r1 in prop::collection::vec(-3.0..3.0f64, 1..3),
        r2 in prop::collection::vec(-3.0..3.0f64, 1..3),
    ) {
        let (a, b) = (Polynomial::from_real_roots(&r1), Polynomial::from_real_roots(&r2));
        let roots = (&a * &b).roots().unwrap();
        prop_assert_eq!(roots.len(), r1.len() + r2.len());
        for &x in r1.iter().chain(&r2) {
            // clustered roots split like eps^(1/multiplicity)
            let nearest = roots.iter().map(|z| (z - Complex::new(x, 0.0)).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(nearest < 1e-4, "root {} missing from {:?}", x, roots);
        }
    }

    #[test]
    fn roots_annihilate_the_polynomial(p in root_strategy()) {
        for z in p.roots().unwrap() {
            let scale: f64 = (0..=p.degree()).map(|j| p.coeff(j).abs() * z.norm().powi(j as i32)).sum();
            prop_assert!(p.eval_complex(z).norm() <= 1e-8 * scale);
        }
    }

    #[test]
    fn scaled_resultant_is_bounded(a in coeff_strategy(), b in coeff_strategy()) {
        let s = scaled_resultant(&a, &b).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&s), "{}", s);
    }

    #[test]
    fn shared_factor_breaks_coprimality(a in root_strategy(), b in root_strategy(), x in -3.0..3.0f64) {
        let common = Polynomial::linear(-x);
        prop_assert!(!are_coprime(&(&a * &common), &(&b * &common), 1e-9).unwrap());
    }

    #[test]
    fn derivative_lowers_degree(p in coeff_strategy(), x in -2.0..2.0f64) {
        let d = p.derivative();
        prop_assert_eq!(d.degree(), p.degree() - 1);
        let h = 1e-6;
        let fd = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
        prop_assert!((fd - d.eval(x)).abs() <= 1e-5 * (1.0 + d.eval(x).abs() + p.max_abs_coeff()));
    }
}

#[test]
fn single_precision_routh() {
    let stable = Polynomial::<f32>::from_real_roots(&[-1.0, -2.0, -3.0]);
    assert!(stable.is_hurwitz().unwrap());
    let unstable = Polynomial::<f32>::from_real_roots(&[-1.0, 2.0]);
    assert!(!unstable.is_hurwitz().unwrap());
}

#[test]
fn thousand_polynomials_against_the_root_oracle() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let (mut checked, mut hurwitz) = (0, 0);
    while checked < 1000 {
        let real: Vec<f64> = (0..rng.random_range(0..4)).map(|_| rng.random_range(-3.0..3.0)).collect();
        let pairs: Vec<(f64, f64)> = (0..rng.random_range(0..3))
            .map(|_| (rng.random_range(-3.0..3.0), rng.random_range(0.1..3.0)))
            .collect();
        if real.is_empty() && pairs.is_empty() {
            continue;
        }
        let p = from_roots(&real, &pairs);
        let Some(expected) = root_oracle(&p) else { continue };
        assert_eq!(p.is_hurwitz().unwrap(), expected, "{p}");
        checked += 1;
        hurwitz += usize::from(expected);
    }
    // both verdicts must be exercised
    assert!(hurwitz > 50 && hurwitz < 950, "{hurwitz}");
}
