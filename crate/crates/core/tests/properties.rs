use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use corrbi::bicat::{coherence_sample, random_algebra, random_chain, random_correspondence, random_unitary};
use corrbi::corr::{corr_multiplicity, tensor, verify_iso, CorrIso};
use corrbi::cstar::{check_star_hom, check_star_hom_units, AlgElement, FdCStarAlgebra, StarHom};
use corrbi::linalg::{kernel_basis, rank, solve, Matrix, Scalar};
use corrbi::pimsner::{core_stage, random_graph, semi_saturation, spectral_component, trichotomy, MonoComb, Monomial, Path};

fn scalar() -> impl Strategy<Value = Scalar> {
    (-6i64..=6, 1i64..=4, -6i64..=6, 1i64..=4).prop_map(|(a, b, c, d)| Scalar::from_parts(a, b, c, d).unwrap())
}

fn matrix(max: usize) -> impl Strategy<Value = Matrix> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        // sparse-ish small entries keep rank deficiencies common
        proptest::collection::vec(prop_oneof![3 => Just(Scalar::zero()), 2 => scalar()], r * c)
            .prop_map(move |v| Matrix::from_fn(r, c, |i, j| v[i * c + j].clone()))
    })
}

/// A random *-homomorphism: canonical embedding conjugated by a unitary,
/// optionally corrupted in one image.
fn star_hom(seed: u64, corrupt: u8) -> Option<StarHom> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_algebra(&mut rng);
    let b = random_algebra(&mut rng);
    let mult: Vec<Vec<usize>> = (0..a.num_blocks()).map(|_| (0..b.num_blocks()).map(|_| rng.gen_range(0..=1)).collect()).collect();
    let h = StarHom::canonical(&a, &b, &mult).ok()?;
    let us: Vec<Matrix> = b.blocks().iter().map(|&n| random_unitary(n, &mut rng)).collect();
    let conj = |x: &AlgElement| {
        let blocks = (0..b.num_blocks()).map(|j| us[j].mul(x.block(j)).mul(&us[j].adjoint())).collect();
        AlgElement::from_blocks(&b, blocks).unwrap()
    };
    let mut images: Vec<AlgElement> = h.images().iter().map(conj).collect();
    let k = rng.gen_range(0..images.len());
    match corrupt % 4 {
        1 => {
            let x = images[k].scale(&Scalar::from_int(2));
            images[k] = x;
        }
        2 => {
            let n = images.len();
            images.swap(k, (k + 1) % n);
        }
        3 => {
            let x = images[k].scale(&Scalar::i());
            images[k] = x;
        }
        _ => {}
    }
    StarHom::from_images(a, b, images).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_field_laws(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn rank_nullity(m in matrix(5)) {
        let k = kernel_basis(&m);
        prop_assert_eq!(rank(&m) + k.len(), m.cols());
        for v in &k {
            prop_assert!(m.apply(v).unwrap().iter().all(|x| x.is_zero()));
        }
        prop_assert_eq!(rank(&m), rank(&m.adjoint()));
    }

    #[test]
    fn solve_recovers_consistent_systems(m in matrix(4), x in proptest::collection::vec(scalar(), 4)) {
        let x = &x[..m.cols()];
        let b = m.apply(x).unwrap();
        let y = solve(&m, &b).unwrap().expect("consistent system");
        prop_assert_eq!(m.apply(&y).unwrap(), b);
    }

    #[test]
    fn star_hom_checks_agree(seed in any::<u64>(), corrupt in any::<u8>()) {
        if let Some(h) = star_hom(seed, corrupt) {
            prop_assert_eq!(check_star_hom(&h).is_ok(), check_star_hom_units(&h).is_ok());
            if corrupt % 4 == 0 {
                prop_assert!(check_star_hom(&h).is_ok());
            }
        }
    }

    #[test]
    fn spectral_projections(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, 3, 4, 4, 200);
        let mut x = MonoComb::zero();
        for _ in 0..6 {
            let k = rng.gen_range(0..=2);
            let l = rng.gen_range(0..=2);
            let mu = corrbi::pimsner::paths_of_length(&g, k);
            let nu = corrbi::pimsner::paths_of_length(&g, l);
            if mu.is_empty() || nu.is_empty() {
                continue;
            }
            let (p, q): (Path, Path) = (mu[rng.gen_range(0..mu.len())].clone(), nu[rng.gen_range(0..nu.len())].clone());
            if let Some(m) = Monomial::new(p, q) {
                x.add_term(m, Scalar::from_int(rng.gen_range(1..5)));
            }
        }
        let mut total = MonoComb::zero();
        for n in -2..=2 {
            let p = spectral_component(&x, n);
            prop_assert_eq!(spectral_component(&p, n), p.clone());
            prop_assert!(spectral_component(&p, n + 1).is_zero());
            total = total.add(&p);
        }
        prop_assert_eq!(total, x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tensor_multiplicities_multiply(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_algebra(&mut rng);
        let b = random_algebra(&mut rng);
        let c = random_algebra(&mut rng);
        if let (Some(e), Some(f)) = (random_correspondence(&a, &b, &mut rng), random_correspondence(&b, &c, &mut rng)) {
            let t = tensor(&e, &f).unwrap();
            prop_assert_eq!(corr_multiplicity(&t.product), corr_multiplicity(&e).compose(&corr_multiplicity(&f)));
        }
    }

    #[test]
    fn associators_are_unitary_and_coherent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chain = random_chain(3, &mut rng);
        let b = corrbi::bicat::bracketing(&chain[0], &chain[1], &chain[2]).unwrap();
        prop_assert!(verify_iso(&b.iso()).is_valid());
        let (p, t) = coherence_sample(&mut rng, false).unwrap();
        prop_assert!(p.ok && t.ok);
    }

    #[test]
    fn identity_isos_verify(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_algebra(&mut rng);
        let b = random_algebra(&mut rng);
        if let Some(e) = random_correspondence(&a, &b, &mut rng) {
            prop_assert!(verify_iso(&CorrIso::identity(&e)).is_valid());
        }
    }

    #[test]
    fn random_graph_stages(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, 3, 4, 4, 120);
        let receivers: Vec<usize> = g.receivers().into_iter().collect();
        let j: Vec<usize> = receivers.into_iter().filter(|_| rng.gen_bool(0.5)).collect();
        let g = g.with_relative(j);
        for n in 0..=2 {
            // core_stage itself fails on an oracle mismatch
            let st = core_stage(&g, n).unwrap();
            prop_assert_eq!(st.algebra().dim(), st.oracle_dim());
        }
        prop_assert!(semi_saturation(&g, 2).holds());
        prop_assert!(trichotomy(&g, 2).unwrap().coincide());
    }
}

#[test]
fn algebra_dimension_is_sum_of_squares() {
    let a = FdCStarAlgebra::new(vec![1, 2, 3]).unwrap();
    assert_eq!(a.dim(), 14);
}

#[test]
fn corrupted_homomorphisms_are_caught() {
    let homs: Vec<StarHom> = (0..200u64).filter_map(|s| star_hom(s, 1)).collect();
    let rejected = homs.iter().filter(|h| check_star_hom_units(h).is_err()).count();
    let zero_target = homs.iter().filter(|h| h.images().iter().any(|x| x.is_zero())).count();
    assert!(rejected + zero_target >= homs.len(), "{rejected} of {}", homs.len());
    assert!(rejected * 2 >= homs.len());
}
