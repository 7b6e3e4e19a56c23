//! Structural invariants of the steps, cutoffs and estimators.

use std::f64::consts::PI;

use chernoff_core::chernoff::step_mass;
use chernoff_core::feynman::{feynman_estimate, MCSpec};
use chernoff_core::fractional::{sample_inverse_subordinator, PassageSample};
use chernoff_core::model::{catalog, extend, smoothstep};
use chernoff_core::rng::substream;
use chernoff_core::{apply_step, ChernoffStep, CoefficientSet, Domain, QuadratureSpec, SubordinationMeasure};
use proptest::prelude::*;

fn quad() -> QuadratureSpec {
    QuadratureSpec {
        nodes: 129,
        ..QuadratureSpec::default()
    }
}

fn one_d_catalog() -> Vec<CoefficientSet> {
    catalog::shipped().into_iter().filter(|c| c.dim() == 1).collect()
}

fn gaussian(center: f64, width: f64, amp: f64) -> impl Fn(&[f64]) -> f64 + Sync {
    move |y: &[f64]| amp * (-(y[0] - center).powi(2) / (2.0 * width * width)).exp()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_is_a_positive_contraction(
        k in 0usize..5, t in 0.001f64..2.0, x in -4.0f64..4.0,
        center in -3.0f64..3.0, width in 0.2f64..3.0, amp in -3.0f64..3.0,
    ) {
        let c = &one_d_catalog()[k];
        let step = ChernoffStep::whole_space(c.clone());
        let v = apply_step(&step, t, &gaussian(center, width, amp), &[x], &quad()).unwrap();
        prop_assert!(v.abs() <= amp.abs() * (1.0 + 1e-12));
        prop_assert!(v * amp.signum() >= 0.0);
    }

    #[test]
    fn step_mass_is_killing_factor(k in 0usize..5, t in 0.001f64..2.0, x in -4.0f64..4.0) {
        let c = &one_d_catalog()[k];
        let step = ChernoffStep::whole_space(c.clone());
        let m = step_mass(&step, t, &[x], &quad()).unwrap();
        prop_assert!((m - (-t * c.killing_at(&[x])).exp()).abs() < 1e-10);
    }

    #[test]
    fn killed_mass_is_sub_markov(t in 0.001f64..1.0, x in -0.5f64..3.5, soft in any::<bool>()) {
        let g = Domain::interval(0.0, 3.0).unwrap();
        let c = catalog::constant_killing(1, 0.7, 0.2).unwrap();
        let step = if soft {
            ChernoffStep::soft_cutoff(c, g).unwrap()
        } else {
            ChernoffStep::hard_kill(c, g).unwrap()
        };
        let m = step_mass(&step, t, &[x], &quad()).unwrap();
        prop_assert!(m >= 0.0 && m <= (-0.2 * t).exp() + 1e-12);
    }

    #[test]
    fn cutoff_bounds(t in 1e-4f64..1.0, x in -1.0f64..4.0) {
        let g = Domain::interval(0.0, 3.0).unwrap();
        let c = g.cutoff(t, &[x]);
        prop_assert!((0.0..=1.0).contains(&c));
        if !g.contains(&[x]) {
            prop_assert_eq!(c, 0.0);
        }
        if g.in_shrunk(t, &[x]) {
            prop_assert_eq!(c, 1.0);
        }
    }

    #[test]
    fn smoothstep_is_monotone(u in -1.0f64..2.0, du in 0.0f64..1.0) {
        let (a, b) = (smoothstep(u), smoothstep(u + du));
        prop_assert!((0.0..=1.0).contains(&a) && a <= b);
    }

    #[test]
    fn extension_is_linear_and_norm_preserving(
        x in -1.0f64..4.0, a in -2.0f64..2.0, b in -2.0f64..2.0, delta in 0.05f64..1.5,
    ) {
        let g = Domain::interval(0.0, 3.0).unwrap();
        let f = |y: &[f64]| (y[0] * 1.3).sin();
        let h = |y: &[f64]| (y[0] - 1.0).powi(2);
        let ef = extend(&g, f, delta).unwrap().eval(&[x]);
        let eh = extend(&g, h, delta).unwrap().eval(&[x]);
        let combo = extend(&g, |y: &[f64]| a * f(y) + b * h(y), delta).unwrap().eval(&[x]);
        prop_assert!((combo - (a * ef + b * eh)).abs() < 1e-12);
        prop_assert!(ef.abs() <= 1.0 && eh.abs() <= 4.0);
        if g.signed_dist(&[x]) >= 0.0 {
            prop_assert_eq!(ef, f(&[x]));
        }
    }

    #[test]
    fn inverse_subordinator_draws_are_nonnegative(seed in any::<u64>(), beta in 0.05f64..0.95, t in 0.01f64..5.0) {
        let mu = SubordinationMeasure::new(vec![(beta, 1.0), (0.5, 0.3)]).unwrap();
        let mut rng = substream(seed, &[]);
        let e = sample_inverse_subordinator(&mu, t, &mut rng);
        prop_assert!(e.is_finite() && e >= 0.0);
    }
}

#[test]
fn passage_tail_is_monotone_in_t() {
    let mu = SubordinationMeasure::new(vec![(0.2, 0.5), (0.8, 2.0)]).unwrap();
    let s = PassageSample::draw(&mu, 20_000, 3);
    for tau in [0.1, 0.5, 2.0] {
        let tails: Vec<f64> = (1..40).map(|k| s.tail(0.1 * k as f64, tau)).collect();
        assert!(tails.windows(2).all(|w| w[1] >= w[0]), "{tails:?}");
    }
}

#[test]
fn estimates_are_deterministic_per_seed() {
    let step = ChernoffStep::whole_space(catalog::compound_poisson(0.5, 1.0, [(0.7, 0.5), (-0.4, 0.5)]).unwrap());
    let f0 = gaussian(0.0, 1.0, 1.0);
    let pts = vec![vec![0.0], vec![1.0]];
    let a = feynman_estimate(&step, 8, 1.0, &f0, &pts, &MCSpec::new(5000, 8)).unwrap();
    let b = feynman_estimate(&step, 8, 1.0, &f0, &pts, &MCSpec::new(5000, 8)).unwrap();
    let c = feynman_estimate(&step, 8, 1.0, &f0, &pts, &MCSpec::new(5000, 9)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.values, c.values);
}

#[test]
fn killed_estimate_is_monotone_in_the_domain() {
    // common random numbers: every path that survives in the small interval
    // survives in the large one
    let c = catalog::heat(1, 1.0).unwrap();
    let small = ChernoffStep::hard_kill(c.clone(), Domain::interval(-1.0, 2.0).unwrap()).unwrap();
    let large = ChernoffStep::hard_kill(c, Domain::interval(-1.5, 3.0).unwrap()).unwrap();
    let f0 = gaussian(0.5, 1.0, 1.0);
    let pts: Vec<Vec<f64>> = (0..7).map(|k| vec![-0.9 + 0.45 * k as f64]).collect();
    let mc = MCSpec::new(20_000, 4);
    let s = feynman_estimate(&small, 16, 0.8, &f0, &pts, &mc).unwrap();
    let l = feynman_estimate(&large, 16, 0.8, &f0, &pts, &mc).unwrap();
    for (a, b) in s.values.iter().zip(&l.values) {
        assert!(a <= b, "{a} > {b}");
    }
}

#[test]
fn antithetic_pairs_reduce_variance_for_symmetric_data() {
    let step = ChernoffStep::whole_space(catalog::heat(1, 0.5).unwrap());
    let f0 = |y: &[f64]| y[0];
    let mut mc = MCSpec::new(4000, 2);
    mc.antithetic = true;
    let f = feynman_estimate(&step, 4, 1.0, &f0, &[vec![0.3]], &mc).unwrap();
    // linear data: each antithetic pair averages to exactly x
    assert!((f.values[0] - 0.3).abs() < 1e-12);
    assert!(f.stderr[0] < 1e-12);
}

#[test]
fn killed_chain_at_pi_over_two_stays_symmetric() {
    // sin is symmetric about pi/2 on (0, pi), so the killed semigroup is too
    let step = ChernoffStep::hard_kill(catalog::heat(1, 1.0).unwrap(), Domain::interval(0.0, PI).unwrap()).unwrap();
    let f0 = |y: &[f64]| if y[0] > 0.0 && y[0] < PI { y[0].sin() } else { 0.0 };
    let pts = vec![vec![PI / 4.0], vec![3.0 * PI / 4.0]];
    let f = feynman_estimate(&step, 16, 0.5, &f0, &pts, &MCSpec::new(100_000, 12)).unwrap();
    let se = f.stderr[0].hypot(f.stderr[1]);
    assert!((f.values[0] - f.values[1]).abs() <= 4.0 * se);
}
