use nalgebra::DMatrix;
use proptest::prelude::*;

use jordantri::algebra::{associative_closure, jordan_closure, lie_closure, GeneratorSet};
use jordantri::identities::check_jordan_identities;
use jordantri::instance::{gen_random, ComplexNormal};
use jordantri::matrix::trace;
use jordantri::spectral::riesz_decomposition;
use jordantri::triangularize::{triangularize, triangularize_batch};
use jordantri::{ComplexMatrix, Execution, ToleranceConfig, C64};

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn cm(m: DMatrix<C64>) -> ComplexMatrix {
    ComplexMatrix::from_dmatrix(m).unwrap()
}

/// The strictly upper generators a hidden instance was built from.
fn hidden_generators(seed: u64, n: usize, k: usize) -> GeneratorSet {
    let mut rng = ComplexNormal::new(seed);
    GeneratorSet::new((0..k).map(|_| cm(rng.strictly_upper(n))).collect(), "hidden").unwrap()
}

fn conjugate(g: &GeneratorSet, u: &DMatrix<C64>) -> GeneratorSet {
    let ua = u.adjoint();
    GeneratorSet::new(g.gens().iter().map(|m| cm(u * m.as_dmatrix() * &ua)).collect(), "conj").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn word_identities_hold_for_arbitrary_matrices(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = ComplexNormal::new(seed);
        let m: Vec<ComplexMatrix> = (0..4).map(|_| cm(rng.matrix(n))).collect();
        let report = check_jordan_identities(&m[0], &m[1], &m[2], &m[3], &cfg()).unwrap();
        prop_assert!(report.all_pass(), "{}", report.render_table());
    }

    #[test]
    fn closure_dimensions_match_the_hidden_closure(seed in 0u64..10_000, n in 2usize..7, k in 1usize..4) {
        let inst = gen_random(seed, n, k, 1e2).unwrap();
        let g = inst.generator_set().unwrap();
        let hidden = hidden_generators(seed, n, k);
        let j = jordan_closure(&g, &cfg()).unwrap();
        prop_assert_eq!(j.dim(), jordan_closure(&hidden, &cfg()).unwrap().dim());
        prop_assert_eq!(lie_closure(&g, &cfg()).unwrap().dim(), lie_closure(&hidden, &cfg()).unwrap().dim());
        prop_assert_eq!(
            associative_closure(&g, &cfg()).unwrap().dim(),
            associative_closure(&hidden, &cfg()).unwrap().dim()
        );
        prop_assert!(j.closure_residual() <= cfg().residual_tol);
        // a unit element within e of a nilpotent one has ||b^n|| of order n e
        for (b, e) in j.basis().iter().zip(j.space.error_estimates()) {
            let power = b.pow(n as u32).frobenius_norm();
            prop_assert!(power <= 10.0 * n as f64 * e + 1e-12, "||b^n|| = {power:e}, estimate {e:e}");
        }
    }

    #[test]
    fn closure_dimension_is_unitarily_invariant(seed in 0u64..10_000, n in 2usize..6, k in 1usize..4) {
        let g = hidden_generators(seed, n, k);
        let u = ComplexNormal::new(seed ^ 0x55).unitary(n);
        let moved = conjugate(&g, &u);
        prop_assert_eq!(jordan_closure(&g, &cfg()).unwrap().dim(), jordan_closure(&moved, &cfg()).unwrap().dim());
        prop_assert_eq!(lie_closure(&g, &cfg()).unwrap().dim(), lie_closure(&moved, &cfg()).unwrap().dim());
    }

    #[test]
    fn triangularization_certificate_checks_out(seed in 0u64..10_000, n in 2usize..10, k in 1usize..4, exp in 0.0f64..3.0) {
        let inst = gen_random(seed, n, k, 10f64.powf(exp)).unwrap();
        let g = inst.generator_set().unwrap();
        let cert = triangularize(&g, &cfg()).unwrap();
        prop_assert!(cert.chain.is_maximal());
        let s = cert.conjugator.as_dmatrix();
        let gram = s.adjoint() * s - DMatrix::<C64>::identity(n, n);
        prop_assert!(gram.norm() < 1e-10);
        for m in g.gens() {
            let t = s.adjoint() * m.as_dmatrix() * s;
            let lower = (0..n).flat_map(|j| (j..n).map(move |i| (i, j))).map(|(i, j)| t[(i, j)].norm()).fold(0.0, f64::max);
            prop_assert!(lower <= cfg().residual_tol * (1.0 + m.op_norm()));
        }
        prop_assert!(cert.chain.invariance_residual(g.gens()).unwrap() <= cfg().residual_tol);
    }

    #[test]
    fn riesz_projectors_resolve_the_identity(seed in any::<u64>(), n in 1usize..8) {
        let a = cm(ComplexNormal::new(seed).matrix(n));
        let dec = riesz_decomposition(&a, &cfg()).unwrap();
        prop_assert_eq!(dec.clusters.iter().map(|c| c.multiplicity).sum::<usize>(), n);
        prop_assert!(dec.invariant_residual(&a) < 1e-8);
        for c in &dec.clusters {
            prop_assert!((trace(&c.projection) - C64::new(c.multiplicity as f64, 0.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn batch_results_do_not_depend_on_execution(seed in 0u64..10_000) {
        let sets: Vec<GeneratorSet> = (0..6)
            .map(|i| gen_random(seed + i, 3 + i as usize, 2, 10.0).unwrap().generator_set().unwrap())
            .collect();
        let seq = triangularize_batch(&sets, &cfg(), Execution::Sequential);
        let par = triangularize_batch(&sets, &cfg(), Execution::Parallel);
        for (x, y) in seq.iter().zip(&par) {
            let (x, y) = (x.as_ref().unwrap(), y.as_ref().unwrap());
            prop_assert_eq!(x.residual.to_bits(), y.residual.to_bits());
            prop_assert_eq!(&x.conjugator, &y.conjugator);
        }
    }
}
