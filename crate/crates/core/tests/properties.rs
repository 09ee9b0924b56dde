mod common;

use common::*;
use maslovkit::forms::{inertia, kernel_basis, pullback, relative_dimension, relative_index, relative_index_via_orthogonal};
use maslovkit::indices::kashiwara_triple;
use maslovkit::lagrangian::SymplecticSpace;
use maslovkit::psig::{jump_decomposition, partial_signatures, TaylorPath};
use maslovkit::{Mat, Rational, Scalar, Subspace, SymForm};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

fn random_subspace(seed: u64, n: usize, k: usize) -> Subspace<Rational> {
    let mut r = rng(seed);
    if k == 0 {
        return Subspace::zero(n);
    }
    Subspace::span(&general(&mut r, n, k)).unwrap()
}

fn random_path(seed: u64, n: usize, zeros: usize, order: usize) -> TaylorPath<Rational> {
    let mut r = rng(seed);
    let mut coeffs = vec![sym_with_kernel(&mut r, n, zeros)];
    for _ in 0..order {
        coeffs.push(sym(&mut r, n));
    }
    TaylorPath::new(Rational::from_integer(0.into()), coeffs).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn inertia_partitions_the_dimension(seed in any::<u64>(), n in 1usize..6) {
        let m = sym(&mut rng(seed), n);
        let i = inertia(&SymForm::new(m.clone()).unwrap()).unwrap();
        prop_assert_eq!(i.n_plus + i.n_minus + i.n_zero, n);
        prop_assert_eq!(i.signature, i.n_plus as i64 - i.n_minus as i64);
        prop_assert_eq!((i.n_plus, i.n_minus, i.n_zero), oracle_inertia(&m));
    }

    #[test]
    fn inertia_is_congruence_invariant(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let form = SymForm::new(sym(&mut r, n)).unwrap();
        let c = invertible(&mut r, n);
        prop_assert_eq!(inertia(&form).unwrap(), inertia(&pullback(&form, &c).unwrap()).unwrap());
    }

    #[test]
    fn kernel_dimension_is_nullity(seed in any::<u64>(), n in 1usize..6, zeros in 0usize..6) {
        let zeros = zeros.min(n);
        let m = sym_with_kernel(&mut rng(seed), n, zeros);
        let form = SymForm::new(m.clone()).unwrap();
        let k = kernel_basis(&form).unwrap();
        prop_assert_eq!(k.dim(), zeros);
        prop_assert_eq!(k.dim(), inertia(&form).unwrap().n_zero);
        prop_assert!(m.mul(k.basis()).data().iter().all(|x| *x == Rational::from_integer(0.into())));
    }

    #[test]
    fn relative_dimension_is_antisymmetric_and_additive(
        seed in any::<u64>(), n in 1usize..6, a in 0usize..6, b in 0usize..6, c in 0usize..6,
    ) {
        let (a, b, c) = (a.min(n), b.min(n), c.min(n));
        let u = random_subspace(seed, n, a);
        let v = random_subspace(seed ^ 1, n, b);
        let w = random_subspace(seed ^ 2, n, c);
        let uv = relative_dimension(&u, &v).unwrap();
        prop_assert_eq!(uv, -relative_dimension(&v, &u).unwrap());
        prop_assert_eq!(uv + relative_dimension(&v, &w).unwrap(), relative_dimension(&u, &w).unwrap());
        prop_assert_eq!(uv, u.dim() as i64 - v.dim() as i64);
    }

    #[test]
    fn relative_index_agrees_with_orthogonal_formula(seed in any::<u64>(), n in 1usize..6, k in 0usize..6) {
        let mut r = rng(seed);
        let m = sym(&mut r, n);
        prop_assume!(!det(&m).is_zero());
        let form = SymForm::new(m).unwrap();
        let w = random_subspace(seed ^ 3, n, k.min(n));
        prop_assert_eq!(relative_index(&form, &w).unwrap(), relative_index_via_orthogonal(&form, &w).unwrap());
    }

    #[test]
    fn signature_table_invariants(seed in any::<u64>(), n in 1usize..5, zeros in 1usize..5) {
        let zeros = zeros.min(n);
        let path = random_path(seed, n, zeros, 4);
        let Ok(table) = partial_signatures(&path) else { return Ok(()); };
        prop_assert!(table.check_invariants().is_ok());
        prop_assert_eq!(table.n0, zeros);
        let dims = table.dims();
        prop_assert!(dims.windows(2).all(|w| w[0] >= w[1]));
        let negated = partial_signatures(&path.neg()).unwrap();
        prop_assert_eq!(negated.dims(), dims);
        let flipped: Vec<i64> = table.sigmas().iter().map(|s| -s).collect();
        prop_assert_eq!(negated.sigmas(), flipped);
    }

    #[test]
    fn jump_sides_add_up(seed in any::<u64>(), n in 1usize..5, zeros in 1usize..5) {
        let path = random_path(seed, n, zeros.min(n), 4);
        let Ok(table) = partial_signatures(&path) else { return Ok(()); };
        let j = jump_decomposition(&table);
        prop_assert_eq!(j.sf_left + j.sf_right, j.sf_across);
        prop_assert_eq!(j.coindex_left + j.coindex_right, j.coindex_across);
        prop_assert_eq!(j.sf_across, table.odd_sigma_sum());
    }

    #[test]
    fn triple_index_is_skew_and_bounded(seed in any::<u64>(), n in 1usize..3) {
        let mut r = rng(seed);
        let sp = SymplecticSpace::<Rational>::standard(n);
        let l: Vec<_> = (0..3).map(|_| random_lagrangian(&sp, &mut r)).collect();
        let t = kashiwara_triple(&l[0], &l[1], &l[2]).unwrap();
        prop_assert!(t.abs() <= n as i64);
        prop_assert_eq!(t, -kashiwara_triple(&l[1], &l[0], &l[2]).unwrap());
        prop_assert_eq!(t, kashiwara_triple(&l[1], &l[2], &l[0]).unwrap());
    }
}

#[test]
fn zero_matrix_has_full_kernel() {
    let m = Mat::<Rational>::zeros(3, 3);
    let form = SymForm::new(m).unwrap();
    assert_eq!(inertia(&form).unwrap().n_zero, 3);
}
