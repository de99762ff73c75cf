//! Closed-form `p₁` coefficients against the general presentation engine on
//! random valid matrices.

use proptest::prelude::*;
use qtm_core::harness::random_valid;
use qtm_core::stringcheck::*;
use qtm_core::SimplePolytope;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn compare(
    p: &SimplePolytope,
    trials: usize,
    bound: i64,
    seed: u64,
    normalize: impl Fn(&SimplePolytope, &qtm_core::CharMatrix) -> qtm_core::Result<qtm_core::CharMatrix>,
    closed: impl Fn(&SimplePolytope, &qtm_core::CharMatrix) -> qtm_core::Result<Coefficients>,
    basis: &[(usize, usize)],
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v0 = p.vertices()[0].clone();
    let mut nonzero = 0;
    for _ in 0..trials {
        let l = random_valid(p, &v0, bound, false, &mut rng).unwrap();
        let l = normalize(p, &l).unwrap();
        let want = engine_coefficients(p, &l, basis).unwrap();
        assert_eq!(closed(p, &l).unwrap(), want, "{:?}", l.rows());
        nonzero += usize::from(want.values().any(|&c| c != 0));
    }
    assert!(nonzero > 0, "every sampled class vanished");
}

#[test]
fn prism_closed_form_matches_engine() {
    for k in 2..=4 {
        let p = SimplePolytope::prism(2 * k).unwrap();
        compare(&p, 40, 2, k as u64, prism_normalize, prism_closed_form, &prism_basis(k));
    }
}

#[test]
fn cube_closed_form_matches_engine() {
    for n in 2..=4 {
        let p = SimplePolytope::cube(n).unwrap();
        compare(&p, 40, 2, n as u64, |_, l| Ok(l.clone()), cube_closed_form, &cube_basis(n));
    }
}

#[test]
fn pentagonal_prism_closed_form_matches_engine() {
    for n in 3..=4 {
        let p = pent_prism(n).unwrap();
        compare(&p, 30, 2, n as u64, pent_prism_normalize, pent_prism_closed_form, &pent_prism_basis(n));
    }
}

#[test]
fn q_prism_closed_form_matches_engine() {
    for n in 3..=4 {
        let p = q_prism(n).unwrap();
        compare(&p, 20, 2, n as u64, q_prism_normalize, q_prism_closed_form, &q_prism_basis(n));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polygon_total_matches_engine_and_parity(m in 3usize..=7, seed in any::<u64>()) {
        let p = SimplePolytope::polygon(m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = random_valid(&p, &p.vertices()[0].clone(), 3, false, &mut rng).unwrap();
        let f = polygon_closed_form(&l).unwrap();
        prop_assert_eq!(f.l.iter().sum::<i64>().rem_euclid(2), (m % 2) as i64);
        let (c, u) = polygon_engine(&p, &l).unwrap();
        prop_assert_eq!(c, f.total * u);
    }
}
